//! Low-rank plus sparse covariance estimators.
//!
//! * [`alce_solve`]: accelerated proximal gradient on
//!   `1/2 ||L + S - Sigma_n||_F^2 + psi ||L||_* + rho ||S||_{1,off}` over PSD `L`.
//! * [`unalce_from_alce`]: re-adds the nuclear threshold to the retained
//!   eigenvalues and corrects the sparse diagonal so the total diagonal is kept.
//! * [`poet_estimate`]: truncated PCA plus thresholded residual.
//! * [`sample_estimate`]: unbiased sample covariance.

mod alce;
mod poet;
mod sample;
mod unalce;

pub use alce::{alce_objective, alce_solve, next_momentum, AlceSolver, SolverState};
pub use poet::{poet_estimate, ThresholdKind};
pub use sample::{is_positive_definite, sample_estimate};
pub use unalce::{unalce, unalce_from_alce};

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::linalg::{self, is_zero, SymmetricMatrix};

/// Thresholds and stopping rule for the ALCE solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Nuclear-norm threshold.
    pub psi: f64,
    /// Off-diagonal l1 threshold.
    pub rho: f64,
    pub epsilon: f64,
    pub max_iter: usize,
}

impl SolverConfig {
    pub const DEFAULT_EPSILON: f64 = 1e-6;
    pub const DEFAULT_MAX_ITER: usize = 5000;

    pub fn new(psi: f64, rho: f64) -> Self {
        Self {
            psi,
            rho,
            epsilon: Self::DEFAULT_EPSILON,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }

    pub fn with_thresholds(&self, psi: f64, rho: f64) -> Self {
        Self { psi, rho, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.psi > 0.0 && self.psi.is_finite()) {
            return Err(invalid("psi", "must be a positive finite number"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(invalid("rho", "must be a positive finite number"));
        }
        if !(self.epsilon > 0.0) {
            return Err(invalid("epsilon", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Rank-`r` eigenpair representation `U diag(d) U^T` of a low-rank component.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankComponent {
    /// `p x r`, orthonormal columns.
    pub vectors: DMatrix<f64>,
    /// Length `r`, non-increasing.
    pub values: DVector<f64>,
}

impl LowRankComponent {
    pub fn new(vectors: DMatrix<f64>, values: DVector<f64>) -> Result<Self> {
        if vectors.ncols() != values.len() {
            return Err(crate::error::Error::DimensionMismatch {
                expected: vectors.ncols(),
                actual: values.len(),
            });
        }
        if vectors.nrows() == 0 {
            return Err(crate::error::Error::EmptyMatrix);
        }
        if values.len() > vectors.nrows() {
            return Err(crate::error::Error::RankTooLarge {
                rank: values.len(),
                dim: vectors.nrows(),
            });
        }
        Ok(Self { vectors, values })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            vectors: DMatrix::zeros(dim, 0),
            values: DVector::zeros(0),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        linalg::low_rank_product(self.dim(), &self.vectors, self.values.as_slice())
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc + v)
    }
}

/// Sparse residual component stored densely, with its off-diagonal support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseComponent {
    entries: SymmetricMatrix,
    support: Vec<(usize, usize)>,
}

impl SparseComponent {
    pub fn new(entries: SymmetricMatrix) -> Self {
        let support = entries.offdiag_support();
        Self { entries, support }
    }

    pub fn entries(&self) -> &SymmetricMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> SymmetricMatrix {
        self.entries
    }

    /// Off-diagonal pairs `(i, j)`, `i < j`, holding a nonzero entry, in
    /// row-major order.
    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    /// Number of nonzero off-diagonal pairs.
    pub fn nonzeros(&self) -> usize {
        self.support.len()
    }

    /// Sign of an off-diagonal entry after the exact-zero test.
    pub fn sign(&self, i: usize, j: usize) -> i8 {
        let v = self.entries.get(i, j);
        if is_zero(v) {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Number of nonzeros per row, diagonal included.
    pub fn degrees(&self) -> Vec<usize> {
        let p = self.dim();
        (0..p)
            .map(|i| (0..p).filter(|&j| !is_zero(self.entries.get(i, j))).count())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Alce,
    Unalce,
    Poet,
    Sample,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Alce => "alce",
            Method::Unalce => "unalce",
            Method::Poet => "poet",
            Method::Sample => "sample",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Non-fatal conditions attached to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateNote {
    /// The solver hit `max_iter` before the convergence criterion held.
    NotConverged,
    /// Unshrinkage requested on a rank-zero low-rank part; nothing changed.
    NothingToUnshrink,
    /// Unshrinkage used a shift different from the solve's `psi`.
    NonCanonicalShift,
}

/// A low-rank plus sparse covariance estimate `sigma = L + S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub low_rank: LowRankComponent,
    pub sparse: SparseComponent,
    pub sigma: SymmetricMatrix,
    pub method: Method,
    /// Nuclear threshold used (the POET rank carries no such threshold).
    pub psi: Option<f64>,
    pub rho: f64,
    pub solver_iters: usize,
    pub converged: bool,
    pub notes: Vec<EstimateNote>,
}

impl Estimate {
    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn rank(&self) -> usize {
        self.low_rank.rank()
    }

    pub fn low_rank_matrix(&self) -> SymmetricMatrix {
        self.low_rank.reconstruct()
    }

    pub fn has_note(&self, note: EstimateNote) -> bool {
        self.notes.contains(&note)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.1, 0.1).validate().is_ok());
        assert!(SolverConfig::new(0.0, 0.1).validate().is_err());
        assert!(SolverConfig::new(0.1, -1.0).validate().is_err());
        let mut cfg = SolverConfig::new(0.1, 0.1);
        cfg.max_iter = 0;
        assert!(cfg.validate().is_err());
        cfg.max_iter = 1;
        cfg.epsilon = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sparse_support_and_degrees() {
        let m = SymmetricMatrix::from_row_slice(
            3,
            &[1.0, 0.0, -0.3, 0.0, 2.0, 1e-15, -0.3, 1e-15, 3.0],
        )
        .unwrap();
        let s = SparseComponent::new(m);
        assert_eq!(s.support(), &[(0, 2)]);
        assert_eq!(s.sign(0, 2), -1);
        assert_eq!(s.sign(1, 2), 0);
        assert_eq!(s.degrees(), alloc::vec![2, 1, 2]);
    }

    #[test]
    fn low_rank_rejects_mismatch() {
        let err = LowRankComponent::new(DMatrix::zeros(3, 2), DVector::zeros(1));
        assert!(err.is_err());
    }
}
