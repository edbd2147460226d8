//! Threshold selection and identifiability diagnostics.
//!
//! Grid pairs are evaluated independently ([`evaluate_mc_pair`],
//! [`evaluate_cv_pair`]) and merged by key ([`select_from_records`]), so the
//! selected pair does not depend on the order in which pairs are visited.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::estimators::{
    alce_solve, is_positive_definite, poet_estimate, sample_estimate, unalce, Estimate,
    LowRankComponent, SolverConfig, SparseComponent, ThresholdKind,
};
use crate::linalg::{self, NormKind, SymmetricMatrix};

/// Ascending lists of nuclear (`psi`) and l1 (`rho`) thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    psi: Vec<f64>,
    rho: Vec<f64>,
}

impl ThresholdGrid {
    pub fn new(psi: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        check_axis("psi_values", &psi)?;
        check_axis("rho_values", &rho)?;
        Ok(Self { psi, rho })
    }

    /// A single `(psi, rho)` pair.
    pub fn single(psi: f64, rho: f64) -> Result<Self> {
        Self::new(alloc::vec![psi], alloc::vec![rho])
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }

    pub fn rho_values(&self) -> &[f64] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.psi.len() * self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All pairs, `psi`-major.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &psi in &self.psi {
            for &rho in &self.rho {
                out.push((psi, rho));
            }
        }
        out
    }
}

fn check_axis(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(name, "must not be empty"));
    }
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid(name, "entries must be positive and finite"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(name, "entries must be strictly ascending"));
    }
    Ok(())
}

/// `count` log-spaced values from `min` to `max` inclusive.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(invalid("range", "need 0 < min <= max"));
    }
    if count == 0 {
        return Err(invalid("count", "must be at least 1"));
    }
    if count == 1 {
        return Ok(alloc::vec![min]);
    }
    let (lo, hi) = (libm::log(min), libm::log(max));
    Ok((0..count)
        .map(|k| {
            if k == 0 {
                min
            } else if k == count - 1 {
                max
            } else {
                libm::exp(lo + (hi - lo) * k as f64 / (count - 1) as f64)
            }
        })
        .collect())
}

/// One row of a selection table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRecord {
    pub psi: f64,
    pub rho: f64,
    pub criterion: f64,
    pub theta_hat: f64,
    pub r_hat: usize,
    /// Off-diagonal nonzero pairs of the sparse estimate.
    pub nz: usize,
    pub pd: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub best_psi: f64,
    pub best_rho: f64,
    pub criterion_value: f64,
    /// Sorted by `(psi, rho)`.
    pub table: Vec<PairRecord>,
}

impl SelectionResult {
    pub fn best_record(&self) -> &PairRecord {
        self.table
            .iter()
            .find(|r| r.psi == self.best_psi && r.rho == self.best_rho)
            .expect("selected pair is in the table")
    }
}

/// Sorts the records by `(psi, rho)` and picks the positive-definite pair with
/// the smallest finite criterion; ties go to the smaller `psi`, then `rho`.
pub fn select_from_records(mut records: Vec<PairRecord>) -> Result<SelectionResult> {
    if records.is_empty() {
        return Err(invalid("grid", "no pairs evaluated"));
    }
    records.sort_by(|a, b| a.psi.total_cmp(&b.psi).then(a.rho.total_cmp(&b.rho)));
    let mut best: Option<&PairRecord> = None;
    for rec in records.iter().filter(|r| r.pd && r.criterion.is_finite()) {
        if best.is_none_or(|b| rec.criterion < b.criterion) {
            best = Some(rec);
        }
    }
    match best {
        Some(b) => Ok(SelectionResult {
            best_psi: b.psi,
            best_rho: b.rho,
            criterion_value: b.criterion,
            table: records.clone(),
        }),
        None => {
            let mut closest = &records[0];
            for rec in &records {
                if rec.criterion < closest.criterion {
                    closest = rec;
                }
            }
            Err(Error::NoFeasiblePair {
                psi: closest.psi,
                rho: closest.rho,
                criterion: closest.criterion,
            })
        }
    }
}

/// MC criterion `max(r ||L||_2 / theta, ||S||_{1,v} / (gamma (1 - theta)))`
/// with `theta = trace(L) / trace(Sigma_n)`.
///
/// Returns `+inf` when `theta` falls outside `(0, 1)`. A rank-zero estimate
/// has `theta = 0` and contributes a zero first term, leaving
/// `||S||_{1,v} / gamma`.
pub fn mc_criterion(est: &Estimate, sigma_n: &SymmetricMatrix, gamma: f64) -> f64 {
    let trace = sigma_n.trace();
    if !(trace > 0.0) || !(gamma > 0.0) {
        return f64::INFINITY;
    }
    let theta = est.low_rank.trace() / trace;
    let s_term = match linalg::norm(est.sparse.entries(), NormKind::L1Column) {
        Ok(v) => v,
        Err(_) => return f64::INFINITY,
    };
    if est.rank() == 0 {
        return s_term / gamma;
    }
    if !(theta > 0.0 && theta < 1.0) {
        return f64::INFINITY;
    }
    let l_term = est.rank() as f64 * est.low_rank.values[0] / theta;
    l_term.max(s_term / (gamma * (1.0 - theta)))
}

/// ALCE followed by UNALCE at one threshold pair.
pub fn fit_unalce(sigma_n: &SymmetricMatrix, cfg: SolverConfig) -> Result<Estimate> {
    let (alce, state) = alce_solve(sigma_n, cfg)?;
    unalce(&alce, &state)
}

pub fn evaluate_mc_pair(
    sigma_n: &SymmetricMatrix,
    psi: f64,
    rho: f64,
    cfg_base: &SolverConfig,
) -> Result<PairRecord> {
    let est = fit_unalce(sigma_n, cfg_base.with_thresholds(psi, rho))?;
    let trace = sigma_n.trace();
    Ok(PairRecord {
        psi,
        rho,
        criterion: mc_criterion(&est, sigma_n, rho / psi),
        theta_hat: if trace != 0.0 {
            est.low_rank.trace() / trace
        } else {
            f64::NAN
        },
        r_hat: est.rank(),
        nz: est.sparse.nonzeros(),
        pd: is_positive_definite(&est.sigma, 0.0),
    })
}

/// Fits UNALCE at every grid pair and returns the positive-definite MC
/// minimizer together with the full table.
pub fn select_by_mc(
    sigma_n: &SymmetricMatrix,
    grid: &ThresholdGrid,
    cfg_base: &SolverConfig,
) -> Result<SelectionResult> {
    if !(sigma_n.trace() > 0.0) {
        return Err(Error::ZeroTrace);
    }
    let records = grid
        .pairs()
        .into_iter()
        .map(|(psi, rho)| evaluate_mc_pair(sigma_n, psi, rho, cfg_base))
        .collect::<Result<Vec<_>>>()?;
    select_from_records(records)
}

/// Estimator fitted inside cross-validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CvMethod {
    Alce,
    Unalce,
    /// POET with a fixed rank; only `rho` from the grid is used.
    Poet {
        rank: usize,
        kind: ThresholdKind,
    },
}

impl CvMethod {
    pub fn fit(
        &self,
        sigma: &SymmetricMatrix,
        psi: f64,
        rho: f64,
        cfg_base: &SolverConfig,
    ) -> Result<Estimate> {
        let cfg = cfg_base.with_thresholds(psi, rho);
        match *self {
            CvMethod::Alce => Ok(alce_solve(sigma, cfg)?.0),
            CvMethod::Unalce => fit_unalce(sigma, cfg),
            CvMethod::Poet { rank, kind } => poet_estimate(sigma, rank, rho, kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    /// Rows are permuted with this seed before the contiguous split.
    pub shuffle_seed: Option<u64>,
    /// Remove column means inside every covariance computation.
    pub center: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            shuffle_seed: None,
            center: false,
        }
    }
}

/// Per-fold training and validation covariances.
#[derive(Debug, Clone)]
pub struct CvFolds {
    pub full: SymmetricMatrix,
    pub folds: Vec<(SymmetricMatrix, SymmetricMatrix)>,
}

/// Row indices of each validation fold: contiguous blocks of the (optionally
/// permuted) row order, the first `n mod H` blocks one row longer.
pub fn fold_assignment(
    n: usize,
    folds: usize,
    shuffle_seed: Option<u64>,
) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(invalid("folds", "need at least 2 folds"));
    }
    if n < 2 * folds {
        return Err(Error::InsufficientData {
            required: 2 * folds,
            actual: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(seed) = shuffle_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in (1..n).rev() {
            let j = rng.random_range(0..=k);
            order.swap(k, j);
        }
    }
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for h in 0..folds {
        let len = base + usize::from(h < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(out)
}

fn select_rows(data: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), data.ncols(), |i, j| data[(rows[i], j)])
}

pub fn prepare_folds(data: &DMatrix<f64>, cv: &CvConfig) -> Result<CvFolds> {
    let n = data.nrows();
    let assignment = fold_assignment(n, cv.folds, cv.shuffle_seed)?;
    let mut folds = Vec::with_capacity(cv.folds);
    for val_rows in &assignment {
        if val_rows.len() < 2 || n - val_rows.len() < 2 {
            return Err(Error::InsufficientData {
                required: 2,
                actual: val_rows.len().min(n - val_rows.len()),
            });
        }
        let mut in_val = alloc::vec![false; n];
        for &i in val_rows {
            in_val[i] = true;
        }
        let train_rows: Vec<usize> = (0..n).filter(|&i| !in_val[i]).collect();
        let train = sample_estimate(&select_rows(data, &train_rows), cv.center)?;
        let val = sample_estimate(&select_rows(data, val_rows), cv.center)?;
        folds.push((train, val));
    }
    Ok(CvFolds {
        full: sample_estimate(data, cv.center)?,
        folds,
    })
}

/// Mean over folds of `||Sigma_hat(train) - Sigma_n(validation)||_F^2`; the
/// table statistics and the PD flag come from the fit on all rows.
pub fn evaluate_cv_pair(
    folds: &CvFolds,
    psi: f64,
    rho: f64,
    method: &CvMethod,
    cfg_base: &SolverConfig,
) -> Result<PairRecord> {
    let mut total = 0.0;
    for (train, val) in &folds.folds {
        let est = method.fit(train, psi, rho, cfg_base)?;
        total += (&est.sigma - val).as_matrix().norm_squared();
    }
    let full = method.fit(&folds.full, psi, rho, cfg_base)?;
    Ok(PairRecord {
        psi,
        rho,
        criterion: total / folds.folds.len() as f64,
        theta_hat: full.low_rank.trace() / full.sigma.trace(),
        r_hat: full.rank(),
        nz: full.sparse.nonzeros(),
        pd: is_positive_definite(&full.sigma, 0.0),
    })
}

/// H-fold cross-validation of the Frobenius loss over the grid.
pub fn cross_validate(
    data: &DMatrix<f64>,
    grid: &ThresholdGrid,
    cv: &CvConfig,
    method: &CvMethod,
    cfg_base: &SolverConfig,
) -> Result<SelectionResult> {
    let folds = prepare_folds(data, cv)?;
    let records = grid
        .pairs()
        .into_iter()
        .map(|(psi, rho)| evaluate_cv_pair(&folds, psi, rho, method, cfg_base))
        .collect::<Result<Vec<_>>>()?;
    select_from_records(records)
}

/// Empty exactly when `xi * mu > 1/54`.
pub fn gamma_range(xi: f64, mu: f64) -> Option<(f64, f64)> {
    if xi * mu > 1.0 / 54.0 {
        None
    } else {
        Some((9.0 * xi, 1.0 / (6.0 * mu)))
    }
}

/// Operational stand-ins for the rank-sparsity incoherence measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsReport {
    /// `sqrt(r / p)`, the smallest possible `xi`.
    pub xi_lower: f64,
    /// Row-coherence proxy `2 max_i ||U_i||^2`, clamped to `[xi_lower, 1]`.
    pub xi_surrogate: f64,
    /// Maximum degree of the sparse part, diagonal included.
    pub mu_surrogate: f64,
    pub gamma_range: Option<(f64, f64)>,
    /// `p^alpha / (xi sqrt(n))`.
    pub psi_theoretical: f64,
    pub alpha: f64,
}

pub fn incoherence_diagnostics(
    low_rank: &LowRankComponent,
    sparse: &SparseComponent,
    alpha: f64,
    n: usize,
) -> Result<DiagnosticsReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid("alpha", "must lie in [0, 1]"));
    }
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    if low_rank.dim() != sparse.dim() {
        return Err(Error::DimensionMismatch {
            expected: low_rank.dim(),
            actual: sparse.dim(),
        });
    }
    let p = low_rank.dim() as f64;
    let r = low_rank.rank();
    let (xi_lower, xi_surrogate) = if r == 0 {
        (0.0, 0.0)
    } else {
        let lower = libm::sqrt(r as f64 / p);
        let max_row = low_rank
            .vectors
            .row_iter()
            .map(|row| row.norm_squared())
            .fold(0.0_f64, f64::max);
        (lower, (2.0 * max_row).min(1.0).max(lower))
    };
    let mu = sparse.degrees().into_iter().max().unwrap_or(0) as f64;
    Ok(DiagnosticsReport {
        xi_lower,
        xi_surrogate,
        mu_surrogate: mu,
        gamma_range: gamma_range(xi_surrogate, mu),
        psi_theoretical: libm::pow(p, alpha) / (xi_surrogate * libm::sqrt(n as f64)),
        alpha,
    })
}

/// Eigenvalue summary used by the positive-definiteness conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdSnapshot {
    /// Smallest retained eigenvalue of the low-rank part (NaN at rank zero).
    pub lambda_r_l: f64,
    pub lambda_p_s: f64,
    pub lambda_p_sigma: f64,
}

impl PdSnapshot {
    pub fn of(est: &Estimate) -> Result<Self> {
        Ok(Self {
            lambda_r_l: est
                .low_rank
                .values
                .iter()
                .copied()
                .last()
                .unwrap_or(f64::NAN),
            lambda_p_s: linalg::min_eigenvalue(est.sparse.entries())?,
            lambda_p_sigma: linalg::min_eigenvalue(&est.sigma)?,
        })
    }
}

/// How the unshrinkage moved the smallest eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdConditions {
    pub alce: PdSnapshot,
    pub unalce: PdSnapshot,
    /// `lambda_r(L_unalce) - (lambda_r(L_alce) + psi_breve)`; zero up to rounding.
    pub low_rank_shift_error: f64,
    /// `lambda_p(S_unalce) - (lambda_p(S_alce) - (r/p) psi_breve)`.
    pub sparse_margin: f64,
    /// `lambda_p(Sigma_unalce) - (lambda_p(Sigma_alce) - (r/p) psi_breve)`.
    pub sigma_margin: f64,
    /// `lambda_p(S_unalce) - (lambda_p(S_alce) - psi_breve max_i P_ii)` with
    /// `P` the projector on the retained eigenvectors; non-negative by Weyl.
    pub sparse_weyl_margin: f64,
}

pub fn pd_conditions(alce: &Estimate, unalce: &Estimate, psi_breve: f64) -> Result<PdConditions> {
    use crate::estimators::Method;
    if alce.method != Method::Alce || unalce.method != Method::Unalce {
        return Err(invalid(
            "estimates",
            "need an ALCE estimate and its UNALCE counterpart",
        ));
    }
    if alce.dim() != unalce.dim() {
        return Err(Error::DimensionMismatch {
            expected: alce.dim(),
            actual: unalce.dim(),
        });
    }
    let a = PdSnapshot::of(alce)?;
    let u = PdSnapshot::of(unalce)?;
    let shift = alce.rank() as f64 / alce.dim() as f64 * psi_breve;
    let max_leverage = alce
        .low_rank
        .vectors
        .row_iter()
        .map(|row| row.norm_squared())
        .fold(0.0_f64, f64::max);
    Ok(PdConditions {
        alce: a,
        unalce: u,
        low_rank_shift_error: if alce.rank() == 0 {
            0.0
        } else {
            u.lambda_r_l - (a.lambda_r_l + psi_breve)
        },
        sparse_margin: u.lambda_p_s - (a.lambda_p_s - shift),
        sigma_margin: u.lambda_p_sigma - (a.lambda_p_sigma - shift),
        sparse_weyl_margin: u.lambda_p_s - (a.lambda_p_s - psi_breve * max_leverage),
    })
}
