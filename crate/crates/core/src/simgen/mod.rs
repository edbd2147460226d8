//! Low-rank plus sparse ground truths and Gaussian samples drawn from them.
//!
//! A truth is built from a [`SettingSpec`]:
//!
//! * `L*` has orthonormal eigenvectors from a QR of a Gaussian `p x r` draw and
//!   eigenvalues linearly spaced between `lambda_r` and `c lambda_r`, scaled to
//!   sum to `tau theta p`.
//! * `S*` has constant diagonal `(1 - theta) tau`, and `round(prop_s p(p-1)/2)`
//!   off-diagonal pairs drawn uniformly, each with a common magnitude and a
//!   random sign. The magnitude is tuned so that the off-diagonal absolute mass
//!   of `S*` over the absolute mass of `Sigma*` equals `rho_corr`, then shrunk
//!   if needed so that `lambda_min(S*) >= 0.01 (1 - theta) tau`.

mod replicates;

pub use replicates::{
    run_replicate, run_replicates, sample_seed, truth_seed, AggregateRow, MethodSpec,
    ReplicateFailure, ReplicateOptions, ReplicateRow, ReplicateTable, TruthMode, Tuning,
};

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::estimators::{LowRankComponent, SparseComponent};
use crate::linalg::{self, SymmetricMatrix};
use crate::metrics::rho_corr;

/// Smallest eigenvalue of `S*` relative to its diagonal level.
pub const PD_FLOOR: f64 = 0.01;

/// Simulation parameters for one setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingSpec {
    pub p: usize,
    pub n: usize,
    pub r: usize,
    /// Share of total variance carried by `L*`.
    pub theta: f64,
    /// Condition number of `L*`.
    pub c: f64,
    /// Proportion of nonzero off-diagonal pairs in `S*`.
    pub prop_s: f64,
    /// Target residual covariance proportion.
    pub rho_corr: f64,
    pub tau: f64,
    pub replicates: usize,
}

impl SettingSpec {
    /// The five reference settings (`id` in `1..=5`), `tau = 1`, 100 replicates.
    pub fn preset(id: u8) -> Result<Self> {
        let (p, n, r, theta, c, prop_s, rho_corr) = match id {
            1 => (100, 1000, 4, 0.7, 2.0, 0.0238, 0.0045),
            2 => (100, 1000, 4, 0.7, 4.0, 0.0677, 0.0048),
            3 => (100, 1000, 3, 0.8, 4.0, 0.1172, 0.0072),
            4 => (150, 150, 5, 0.8, 2.0, 0.0320, 0.0033),
            5 => (200, 100, 6, 0.8, 2.0, 0.0366, 0.0039),
            _ => {
                return Err(invalid(
                    "setting",
                    format!("unknown setting id {id}; expected 1..=5"),
                ))
            }
        };
        Ok(Self {
            p,
            n,
            r,
            theta,
            c,
            prop_s,
            rho_corr,
            tau: 1.0,
            replicates: 100,
        })
    }

    /// Shrinks `p` and `n` by `factor`, keeping `r` and all proportions.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(invalid("scale", "must be a positive finite number"));
        }
        let p = libm::round(self.p as f64 * factor) as usize;
        let n = libm::round(self.n as f64 * factor) as usize;
        let spec = Self {
            p: p.max(self.r + 1),
            n: n.max(2),
            ..*self
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(invalid("p", "must be at least 2"));
        }
        if self.r == 0 || self.r >= self.p {
            return Err(invalid("r", "must satisfy 1 <= r < p"));
        }
        if self.n < 2 {
            return Err(invalid("n", "must be at least 2"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(invalid("theta", "must lie in (0, 1)"));
        }
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(invalid("c", "must be at least 1"));
        }
        if !(self.prop_s >= 0.0 && self.prop_s < 1.0) {
            return Err(invalid("prop_s", "must lie in [0, 1)"));
        }
        if !(self.rho_corr >= 0.0 && self.rho_corr < 1.0) {
            return Err(invalid("rho_corr", "must lie in [0, 1)"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid("tau", "must be positive"));
        }
        Ok(())
    }

    pub fn numvar(&self) -> usize {
        self.p * (self.p - 1) / 2
    }

    /// Number of nonzero off-diagonal pairs `i < j` in `S*`.
    pub fn support_size(&self) -> usize {
        libm::round(self.prop_s * self.numvar() as f64) as usize
    }

    /// Eigenvalues of `L*`, descending, linearly spaced with ratio `c`
    /// and summing to `tau theta p`.
    pub fn latent_eigenvalues(&self) -> Vec<f64> {
        let r = self.r;
        let multipliers: Vec<f64> = (0..r)
            .map(|k| {
                if r == 1 {
                    1.0
                } else {
                    self.c - (self.c - 1.0) * k as f64 / (r - 1) as f64
                }
            })
            .collect();
        let total: f64 = multipliers.iter().sum();
        let smallest = self.tau * self.theta * self.p as f64 / total;
        multipliers.iter().map(|m| m * smallest).collect()
    }
}

/// A generated `Sigma* = L* + S*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub l_star: LowRankComponent,
    pub s_star: SparseComponent,
    pub sigma_star: SymmetricMatrix,
    pub seed: u64,
    /// Common off-diagonal magnitude of `S*`.
    pub offdiag_magnitude: f64,
    /// Residual covariance proportion actually attained.
    pub rho_corr_achieved: f64,
    l_dense: SymmetricMatrix,
}

impl GroundTruth {
    pub fn dim(&self) -> usize {
        self.sigma_star.dim()
    }

    pub fn rank(&self) -> usize {
        self.l_star.rank()
    }

    pub fn l_star_matrix(&self) -> SymmetricMatrix {
        self.l_dense.clone()
    }

    pub fn l_star_ref(&self) -> &SymmetricMatrix {
        &self.l_dense
    }
}

fn pair_from_index(mut idx: usize, p: usize) -> (usize, usize) {
    for i in 0..p {
        let row_len = p - 1 - i;
        if idx < row_len {
            return (i, i + 1 + idx);
        }
        idx -= row_len;
    }
    unreachable!("pair index out of range")
}

fn sparse_with_magnitude(
    p: usize,
    diag: f64,
    pairs: &[(usize, usize, f64)],
    magnitude: f64,
) -> SymmetricMatrix {
    let mut s = SymmetricMatrix::from_diagonal(&alloc::vec![diag; p]);
    for &(i, j, sign) in pairs {
        s.set(i, j, sign * magnitude);
    }
    s
}

pub fn generate_ground_truth(spec: &SettingSpec, seed: u64) -> Result<GroundTruth> {
    spec.validate()?;
    let p = spec.p;
    let r = spec.r;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let gauss = DMatrix::from_fn(p, r, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = gauss.qr().q();
    let values = DVector::from_vec(spec.latent_eigenvalues());
    let l_star = LowRankComponent::new(q, values)?;
    let l_dense = l_star.reconstruct();

    // Uniform draw of the support by a partial Fisher-Yates shuffle.
    let numvar = spec.numvar();
    let s_count = spec.support_size();
    let mut indices: Vec<usize> = (0..numvar).collect();
    for k in 0..s_count {
        let pick = rng.random_range(k..numvar);
        indices.swap(k, pick);
    }
    let mut chosen: Vec<usize> = indices[..s_count].to_vec();
    chosen.sort_unstable();
    let pairs: Vec<(usize, usize, f64)> = chosen
        .iter()
        .map(|&idx| {
            let (i, j) = pair_from_index(idx, p);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            (i, j, sign)
        })
        .collect();

    let diag = (1.0 - spec.theta) * spec.tau;
    let attained = |a: f64| {
        let s = sparse_with_magnitude(p, diag, &pairs, a);
        rho_corr(&s, &(&l_dense + &s))
    };

    let mut magnitude = 0.0;
    if s_count > 0 && spec.rho_corr > 0.0 {
        let mut hi = diag.max(1e-3);
        let mut guard = 0;
        while attained(hi) < spec.rho_corr {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::InfeasibleSetting(format!(
                    "rho_corr {} unreachable",
                    spec.rho_corr
                )));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if attained(mid) < spec.rho_corr {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        magnitude = 0.5 * (lo + hi);

        // lambda_min(diag I + a A) = diag + a lambda_min(A) for the sign pattern A.
        let pattern = sparse_with_magnitude(p, 0.0, &pairs, 1.0);
        let pattern_min = linalg::min_eigenvalue(&pattern)?;
        let floor = PD_FLOOR * diag;
        if diag + magnitude * pattern_min < floor {
            magnitude = (diag - floor) / -pattern_min;
        }
    }

    let s_dense = sparse_with_magnitude(p, diag, &pairs, magnitude);
    let lambda_min_s = linalg::min_eigenvalue(&s_dense)?;
    if !(lambda_min_s > 0.0) {
        return Err(Error::InfeasibleSetting(format!(
            "S* is not positive definite (lambda_min = {lambda_min_s:e})"
        )));
    }
    let sigma_star = &l_dense + &s_dense;
    let rho_corr_achieved = rho_corr(&s_dense, &sigma_star);
    Ok(GroundTruth {
        l_star,
        s_star: SparseComponent::new(s_dense),
        sigma_star,
        seed,
        offdiag_magnitude: magnitude,
        rho_corr_achieved,
        l_dense,
    })
}

/// Draws `n` rows `x = B f + e` with `B = U diag(sqrt(d))`, `f ~ N(0, I_r)`
/// and `e ~ N(0, S*)`.
pub fn sample_data(gt: &GroundTruth, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: n,
        });
    }
    let p = gt.dim();
    let r = gt.rank();
    let chol = gt
        .s_star
        .entries()
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::FactorizationFailure)?;
    let lower = chol.l();
    let mut loadings = gt.l_star.vectors.clone();
    for (k, &d) in gt.l_star.values.iter().enumerate() {
        loadings.column_mut(k).scale_mut(libm::sqrt(d));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = DMatrix::from_fn(n, r, |_, _| rng.sample::<f64, _>(StandardNormal));
    let noise = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(factors * loadings.transpose() + noise * lower.transpose())
}
