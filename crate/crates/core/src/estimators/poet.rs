use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SymmetricMatrix};

use super::{Estimate, LowRankComponent, Method, SparseComponent};

/// Residual thresholding rule for POET.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    /// Soft thresholding at the constant level `rho`.
    Soft,
    /// Hard thresholding at the constant level `rho`.
    Hard,
    /// Soft thresholding at `rho * sqrt(r_ii r_jj)`, i.e. constant on the
    /// residual correlation scale.
    SoftCorrelation,
    /// Hard thresholding on the residual correlation scale.
    HardCorrelation,
}

/// Principal orthogonal complement thresholding: the top-`rank` eigenpairs of
/// `sigma_n` form the low-rank part and the off-diagonal of the residual is
/// thresholded, its diagonal kept.
pub fn poet_estimate(
    sigma_n: &SymmetricMatrix,
    rank: usize,
    rho: f64,
    kind: ThresholdKind,
) -> Result<Estimate> {
    let p = sigma_n.dim();
    if rank > p {
        return Err(Error::RankTooLarge { rank, dim: p });
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid("rho", "must be a non-negative finite number"));
    }

    let low_rank = if rank == 0 {
        LowRankComponent::empty(p)
    } else {
        let eig = linalg::eigendecompose(sigma_n)?;
        LowRankComponent {
            vectors: eig.vectors.columns(0, rank).into_owned(),
            values: DVector::from_iterator(rank, eig.values.iter().take(rank).copied()),
        }
    };
    let l = low_rank.reconstruct();
    let residual = sigma_n - &l;
    let resid_diag: Vec<f64> = residual.diagonal();

    let sparse = linalg::map_offdiag(&residual, |i, j, x| {
        let level = match kind {
            ThresholdKind::Soft | ThresholdKind::Hard => rho,
            ThresholdKind::SoftCorrelation | ThresholdKind::HardCorrelation => {
                rho * libm::sqrt((resid_diag[i] * resid_diag[j]).max(0.0))
            }
        };
        match kind {
            ThresholdKind::Soft | ThresholdKind::SoftCorrelation => {
                linalg::soft_threshold(x, level)
            }
            ThresholdKind::Hard | ThresholdKind::HardCorrelation => {
                linalg::hard_threshold(x, level)
            }
        }
    });

    // Sigma = Sigma_n minus what the thresholding removed; untouched entries
    // reproduce Sigma_n exactly.
    let removed = &residual - &sparse;
    let sigma = sigma_n - &removed;

    Ok(Estimate {
        low_rank,
        sparse: SparseComponent::new(sparse),
        sigma,
        method: Method::Poet,
        psi: None,
        rho,
        solver_iters: 0,
        converged: true,
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> SymmetricMatrix {
        SymmetricMatrix::from_row_slice(3, &[3.0, 1.2, 0.4, 1.2, 2.0, 0.3, 0.4, 0.3, 1.5]).unwrap()
    }

    #[test]
    fn rank_zero_is_pure_thresholding() {
        let m = example();
        let est = poet_estimate(&m, 0, 0.35, ThresholdKind::Soft).unwrap();
        assert_eq!(est.rank(), 0);
        let expected = linalg::soft_threshold_offdiag(&m, 0.35).unwrap();
        assert!(est.sparse.entries().max_abs_diff(&expected) < 1e-15);
        assert!(est.sigma.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn full_rank_without_threshold_reproduces_input() {
        let m = example();
        for kind in [
            ThresholdKind::Soft,
            ThresholdKind::Hard,
            ThresholdKind::SoftCorrelation,
        ] {
            let est = poet_estimate(&m, 3, 0.0, kind).unwrap();
            assert_eq!(est.sigma, m);
        }
    }

    #[test]
    fn rank_above_dimension_fails() {
        assert!(matches!(
            poet_estimate(&example(), 4, 0.1, ThresholdKind::Soft),
            Err(Error::RankTooLarge { rank: 4, dim: 3 })
        ));
    }

    #[test]
    fn hard_threshold_keeps_survivors() {
        let m = example();
        let est = poet_estimate(&m, 0, 0.35, ThresholdKind::Hard).unwrap();
        assert_eq!(est.sparse.entries().get(0, 1), 1.2);
        assert_eq!(est.sparse.entries().get(0, 2), 0.4);
        assert_eq!(est.sparse.entries().get(1, 2), 0.0);
    }

    #[test]
    fn correlation_scale_threshold() {
        let m = SymmetricMatrix::from_row_slice(2, &[4.0, 1.0, 1.0, 1.0]).unwrap();
        // level = 0.4 * sqrt(4 * 1) = 0.8
        let est = poet_estimate(&m, 0, 0.4, ThresholdKind::SoftCorrelation).unwrap();
        assert!((est.sparse.entries().get(0, 1) - 0.2).abs() < 1e-15);
    }
}
