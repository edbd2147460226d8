//! Comparison metrics between an estimate and a known ground truth.
//!
//! Support classification counts run over the off-diagonal pairs `i < j`
//! only, so `numvar = p (p - 1) / 2`. Rates whose denominator is zero are
//! reported as `None` rather than as zeros.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::{Estimate, SparseComponent};
use crate::linalg::{self, NormKind, SymmetricMatrix};
use crate::simgen::GroundTruth;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittingLosses {
    /// `||S_hat - S*||_F + ||L_hat - L*||_F`.
    pub loss: f64,
    pub loss_l: f64,
    pub loss_s: f64,
    /// `||Sigma_hat - Sigma*||_F`.
    pub total_loss: f64,
    /// `||Sigma_hat - Sigma_n||_F`.
    pub sample_total_loss: f64,
}

pub fn fitting_losses(
    est: &Estimate,
    gt: &GroundTruth,
    sigma_n: &SymmetricMatrix,
) -> Result<FittingLosses> {
    check_dim(est.dim(), gt.sigma_star.dim())?;
    check_dim(est.dim(), sigma_n.dim())?;
    let loss_l = est
        .low_rank_matrix()
        .frobenius_distance(&gt.l_star_matrix());
    let loss_s = est.sparse.entries().frobenius_distance(gt.s_star.entries());
    Ok(FittingLosses {
        loss: loss_l + loss_s,
        loss_l,
        loss_s,
        total_loss: est.sigma.frobenius_distance(&gt.sigma_star),
        sample_total_loss: est.sigma.frobenius_distance(sigma_n),
    })
}

/// Raw counts behind [`ClassificationMetrics`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SupportCounts {
    pub numvar: usize,
    /// True nonzeros.
    pub s: usize,
    /// Estimated nonzeros.
    pub nz: usize,
    /// Estimated nonzero where the truth is nonzero.
    pub tp: usize,
    /// Estimated zero where the truth is zero.
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    /// Truth positive, estimated negative.
    pub fpos: usize,
    /// Truth negative, estimated positive.
    pub fneg: usize,
    pub truth_pos: usize,
    pub truth_neg: usize,
    /// Truth positive, estimated positive.
    pub pos_hits: usize,
    /// Truth negative, estimated negative.
    pub neg_hits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationMetrics {
    pub counts: SupportCounts,
    pub nz: usize,
    pub perc_nz: f64,
    pub err: f64,
    pub errplus: Option<f64>,
    pub errtot: f64,
    pub sens: Option<f64>,
    pub spec: Option<f64>,
    pub senspos: Option<f64>,
    pub specpos: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn support_counts(s_hat: &SparseComponent, s_star: &SparseComponent) -> Result<SupportCounts> {
    check_dim(s_hat.dim(), s_star.dim())?;
    let p = s_hat.dim();
    let mut c = SupportCounts {
        numvar: p * (p - 1) / 2,
        ..SupportCounts::default()
    };
    for i in 0..p {
        for j in (i + 1)..p {
            let truth = s_star.sign(i, j);
            let est = s_hat.sign(i, j);
            if est != 0 {
                c.nz += 1;
            }
            match (truth != 0, est != 0) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
            match truth {
                1 => {
                    c.truth_pos += 1;
                    match est {
                        1 => c.pos_hits += 1,
                        -1 => c.fpos += 1,
                        _ => {}
                    }
                }
                -1 => {
                    c.truth_neg += 1;
                    match est {
                        -1 => c.neg_hits += 1,
                        1 => c.fneg += 1,
                        _ => {}
                    }
                }
                _ => {}
            }
        }
    }
    c.s = c.truth_pos + c.truth_neg;
    Ok(c)
}

pub fn classification_metrics(
    s_hat: &SparseComponent,
    s_star: &SparseComponent,
) -> Result<ClassificationMetrics> {
    let c = support_counts(s_hat, s_star)?;
    let numvar = c.numvar.max(1) as f64;
    Ok(ClassificationMetrics {
        counts: c,
        nz: c.nz,
        perc_nz: c.nz as f64 / numvar,
        err: (c.fp + c.fn_) as f64 / numvar,
        errplus: ratio(c.fpos + c.fneg, c.s),
        errtot: (c.fpos + c.fneg + c.fn_) as f64 / numvar,
        sens: ratio(c.tp, c.s),
        spec: ratio(c.tn, c.numvar - c.s),
        senspos: ratio(c.pos_hits, c.truth_pos),
        specpos: ratio(c.neg_hits, c.truth_neg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureMetrics {
    /// `trace(L_hat) / trace(Sigma_hat)`.
    pub theta_hat: f64,
    pub rho_corr_hat: f64,
    pub eig_sigma: f64,
    pub eig_s: f64,
    pub eig_l: f64,
    pub cond_sigma: f64,
    pub cond_s: f64,
    /// `lambda_1 / lambda_r` of the low-rank part; NaN at rank zero.
    pub cond_l: f64,
    pub spec_sigma: f64,
    pub spec_s: f64,
    pub spec_l: f64,
}

/// Absolute off-diagonal mass of `s` over the absolute mass of `sigma`.
pub fn rho_corr(s: &SymmetricMatrix, sigma: &SymmetricMatrix) -> f64 {
    let off = linalg::norm(s, NormKind::L1Offdiag).unwrap_or(0.0);
    let total = linalg::norm(sigma, NormKind::L1).unwrap_or(0.0);
    if total > 0.0 {
        off / total
    } else {
        0.0
    }
}

/// Euclidean distance between two spectra sorted non-increasing, the shorter
/// one padded with zeros.
pub fn eigen_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let mut acc = 0.0;
    for k in 0..n {
        let x = a.get(k).copied().unwrap_or(0.0);
        let y = b.get(k).copied().unwrap_or(0.0);
        acc += (x - y) * (x - y);
    }
    libm::sqrt(acc)
}

fn condition(values: &[f64]) -> f64 {
    match (values.first(), values.last()) {
        (Some(&hi), Some(&lo)) => hi / lo,
        _ => f64::NAN,
    }
}

pub fn structure_metrics(est: &Estimate, gt: &GroundTruth) -> Result<StructureMetrics> {
    check_dim(est.dim(), gt.sigma_star.dim())?;
    let trace = est.sigma.trace();
    if trace == 0.0 {
        return Err(Error::ZeroTrace);
    }
    let sigma_eig = linalg::eigenvalues(&est.sigma)?;
    let s_eig = linalg::eigenvalues(est.sparse.entries())?;
    let l_eig: Vec<f64> = est.low_rank.values.iter().copied().collect();
    let sigma_star_eig = linalg::eigenvalues(&gt.sigma_star)?;
    let s_star_eig = linalg::eigenvalues(gt.s_star.entries())?;
    let l_star_eig: Vec<f64> = gt.l_star.values.iter().copied().collect();

    Ok(StructureMetrics {
        theta_hat: est.low_rank.trace() / trace,
        rho_corr_hat: rho_corr(est.sparse.entries(), &est.sigma),
        eig_sigma: eigen_distance(&sigma_eig, &sigma_star_eig),
        eig_s: eigen_distance(&s_eig, &s_star_eig),
        eig_l: eigen_distance(&l_eig, &l_star_eig),
        cond_sigma: condition(&sigma_eig),
        cond_s: condition(&s_eig),
        cond_l: condition(&l_eig),
        spec_sigma: sigma_eig[0],
        spec_s: s_eig[0],
        spec_l: l_eig.first().copied().unwrap_or(0.0),
    })
}

/// `max(||S_hat - S*||_max / gamma, ||L_hat - L*||_2)` with the operator
/// norm on the (indefinite) low-rank error.
pub fn g_gamma_loss(est: &Estimate, gt: &GroundTruth, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(crate::error::invalid("gamma", "must be positive"));
    }
    check_dim(est.dim(), gt.sigma_star.dim())?;
    let ds = est.sparse.entries().max_abs_diff(gt.s_star.entries());
    let dl = linalg::operator_norm(&(&est.low_rank_matrix() - &gt.l_star_matrix()))?;
    Ok((ds / gamma).max(dl))
}

/// Every comparison quantity for one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub r_hat: usize,
    pub losses: FittingLosses,
    pub classification: ClassificationMetrics,
    pub structure: StructureMetrics,
    pub g_gamma: f64,
}

impl MetricsReport {
    /// Column names of [`MetricsReport::values`], in order.
    pub const COLUMNS: [&'static str; 26] = [
        "r_hat",
        "theta_hat",
        "rho_corr_hat",
        "prop_nz",
        "tl",
        "sample_tl",
        "loss",
        "loss_l",
        "loss_s",
        "err",
        "errplus",
        "errtot",
        "sens",
        "spec",
        "senspos",
        "specpos",
        "eig_sigma",
        "eig_s",
        "eig_l",
        "cond_sigma",
        "cond_s",
        "cond_l",
        "spec_norm_sigma",
        "spec_norm_s",
        "spec_norm_l",
        "g_gamma",
    ];

    /// Flat values matching [`MetricsReport::COLUMNS`]; undefined rates are NaN.
    pub fn values(&self) -> [f64; 26] {
        let c = &self.classification;
        let s = &self.structure;
        let l = &self.losses;
        let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
        [
            self.r_hat as f64,
            s.theta_hat,
            s.rho_corr_hat,
            c.perc_nz,
            l.total_loss,
            l.sample_total_loss,
            l.loss,
            l.loss_l,
            l.loss_s,
            c.err,
            opt(c.errplus),
            c.errtot,
            opt(c.sens),
            opt(c.spec),
            opt(c.senspos),
            opt(c.specpos),
            s.eig_sigma,
            s.eig_s,
            s.eig_l,
            s.cond_sigma,
            s.cond_s,
            s.cond_l,
            s.spec_sigma,
            s.spec_s,
            s.spec_l,
            self.g_gamma,
        ]
    }
}

pub fn evaluate(
    est: &Estimate,
    gt: &GroundTruth,
    sigma_n: &SymmetricMatrix,
    gamma: f64,
) -> Result<MetricsReport> {
    Ok(MetricsReport {
        r_hat: est.rank(),
        losses: fitting_losses(est, gt, sigma_n)?,
        classification: classification_metrics(&est.sparse, &gt.s_star)?,
        structure: structure_metrics(est, gt)?,
        g_gamma: g_gamma_loss(est, gt, gamma)?,
    })
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(p: usize, entries: &[(usize, usize, f64)]) -> SparseComponent {
        let mut m = SymmetricMatrix::identity(p);
        for &(i, j, v) in entries {
            m.set(i, j, v);
        }
        SparseComponent::new(m)
    }

    #[test]
    fn perfect_recovery() {
        let s = sparse(4, &[(0, 1, 0.3), (2, 3, -0.2)]);
        let m = classification_metrics(&s, &s).unwrap();
        assert_eq!(m.err, 0.0);
        assert_eq!(m.sens, Some(1.0));
        assert_eq!(m.spec, Some(1.0));
        assert_eq!(m.senspos, Some(1.0));
        assert_eq!(m.specpos, Some(1.0));
        assert_eq!(m.errplus, Some(0.0));
    }

    #[test]
    fn diagonal_estimate_misses_everything() {
        let truth = sparse(4, &[(0, 1, 0.3), (2, 3, -0.2), (1, 3, 0.1)]);
        let est = sparse(4, &[]);
        let m = classification_metrics(&est, &truth).unwrap();
        assert_eq!(m.counts.fn_, 3);
        assert!((m.err - 3.0 / 6.0).abs() < 1e-15);
        assert_eq!(m.sens, Some(0.0));
        assert_eq!(m.spec, Some(1.0));
    }

    #[test]
    fn undefined_rates_without_true_nonzeros() {
        let truth = sparse(3, &[]);
        let est = sparse(3, &[(0, 1, 0.5)]);
        let m = classification_metrics(&est, &truth).unwrap();
        assert_eq!(m.errplus, None);
        assert_eq!(m.sens, None);
        assert_eq!(m.senspos, None);
        assert_eq!(m.specpos, None);
        assert_eq!(m.counts.fp, 1);
    }

    #[test]
    fn sign_errors() {
        let truth = sparse(3, &[(0, 1, 0.5), (0, 2, -0.5)]);
        let est = sparse(3, &[(0, 1, -0.1), (0, 2, 0.2), (1, 2, 0.3)]);
        let m = classification_metrics(&est, &truth).unwrap();
        assert_eq!(m.counts.fpos, 1);
        assert_eq!(m.counts.fneg, 1);
        assert_eq!(m.errplus, Some(1.0));
        assert_eq!(m.senspos, Some(0.0));
        assert!((m.errtot - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_distance_pads() {
        assert_eq!(eigen_distance(&[3.0, 4.0], &[3.0]), 4.0);
        assert_eq!(eigen_distance(&[], &[]), 0.0);
    }
}
