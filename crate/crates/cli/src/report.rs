//! Scalar summaries and per-variable profiles of an estimate.

use lrscov_core::linalg::{eigenvalues, ZERO_TOL};
use lrscov_core::metrics::rho_corr;
use lrscov_core::{Estimate, SymmetricMatrix};
use serde::Serialize;

/// The scalar summary of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub r_hat: usize,
    /// Off-diagonal nonzero pairs of the sparse component.
    pub nz: usize,
    /// `nz` over the number of off-diagonal pairs.
    pub perc_nz: f64,
    /// `trace(L_hat) / trace(Sigma_hat)`.
    pub theta_hat: f64,
    pub rho_corr_hat: f64,
    /// Frobenius distance between the estimate and the input covariance.
    pub sample_tl: f64,
    pub cond_sigma: f64,
    pub cond_s: f64,
    /// `None` when the low-rank component is empty.
    pub cond_l: Option<f64>,
    pub lambda_min_sigma: f64,
    pub lambda_min_s: f64,
    pub positive_definite: bool,
    pub latent_eigenvalues: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

pub fn summarize(est: &Estimate, sigma_n: &SymmetricMatrix) -> lrscov_core::Result<Summary> {
    let p = est.dim();
    let pairs = p * (p - 1) / 2;
    let nz = est.sparse.nonzeros();
    let sigma_eig = eigenvalues(&est.sigma)?;
    let s_eig = eigenvalues(est.sparse.entries())?;
    let latent: Vec<f64> = est.low_rank.values.iter().copied().collect();
    let lambda_min_sigma = sigma_eig[p - 1];
    Ok(Summary {
        r_hat: est.rank(),
        nz,
        perc_nz: if pairs > 0 {
            nz as f64 / pairs as f64
        } else {
            0.0
        },
        theta_hat: est.low_rank.trace() / est.sigma.trace(),
        rho_corr_hat: rho_corr(est.sparse.entries(), &est.sigma),
        sample_tl: est.sigma.frobenius_distance(sigma_n),
        cond_sigma: sigma_eig[0] / lambda_min_sigma,
        cond_s: s_eig[0] / s_eig[p - 1],
        cond_l: match (latent.first(), latent.last()) {
            (Some(hi), Some(lo)) => Some(hi / lo),
            _ => None,
        },
        lambda_min_sigma,
        lambda_min_s: s_eig[p - 1],
        positive_definite: lambda_min_sigma > 0.0,
        latent_eigenvalues: latent,
        converged: est.converged,
        iterations: est.solver_iters,
    })
}

/// Per-variable structure of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableProfile {
    pub label: String,
    /// Off-diagonal nonzeros in the variable's row of the sparse component.
    pub degree: usize,
    /// `l_jj / sigma_jj`.
    pub communality: f64,
    /// `s_jj / sigma_jj`.
    pub idiosyncratic: f64,
}

/// Labels ordered from largest to smallest value; ties keep input order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rankings {
    pub degree: Vec<String>,
    pub communality: Vec<String>,
    pub idiosyncratic: Vec<String>,
}

pub fn variable_profiles(est: &Estimate, labels: &[String]) -> Vec<VariableProfile> {
    let l = est.low_rank_matrix();
    let s = est.sparse.entries();
    let degrees = est.sparse.degrees();
    (0..est.dim())
        .map(|j| {
            let sigma_jj = est.sigma.get(j, j);
            let diag_counted = usize::from(s.get(j, j).abs() >= ZERO_TOL);
            VariableProfile {
                label: labels[j].clone(),
                degree: degrees[j].saturating_sub(diag_counted),
                communality: l.get(j, j) / sigma_jj,
                idiosyncratic: s.get(j, j) / sigma_jj,
            }
        })
        .collect()
}

fn rank_by(profiles: &[VariableProfile], key: impl Fn(&VariableProfile) -> f64) -> Vec<String> {
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by(|&a, &b| key(&profiles[b]).total_cmp(&key(&profiles[a])));
    order
        .into_iter()
        .map(|k| profiles[k].label.clone())
        .collect()
}

pub fn rankings(profiles: &[VariableProfile]) -> Rankings {
    Rankings {
        degree: rank_by(profiles, |v| v.degree as f64),
        communality: rank_by(profiles, |v| v.communality),
        idiosyncratic: rank_by(profiles, |v| v.idiosyncratic),
    }
}
