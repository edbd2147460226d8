use alloc::string::String;
use thiserror::Error;

/// Errors produced by the estimation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("matrix is not symmetric: max asymmetry {max_asymmetry:e}")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The symmetric eigensolver did not converge.
    #[error(
        "eigendecomposition failed to converge on a {dim}x{dim} matrix \
         (max |entry| {max_abs:e}, diagonal range [{diag_min:e}, {diag_max:e}])"
    )]
    EigenFailure {
        dim: usize,
        max_abs: f64,
        diag_min: f64,
        diag_max: f64,
    },

    #[error("Cholesky factorization failed: matrix is not positive definite")]
    FactorizationFailure,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("insufficient data: need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("rank {rank} exceeds dimension {dim}")]
    RankTooLarge { rank: usize, dim: usize },

    #[error("trace is zero")]
    ZeroTrace,

    /// No grid pair produced a positive-definite estimate.
    #[error(
        "no positive-definite threshold pair; best infeasible pair psi={psi}, rho={rho} \
         (criterion {criterion})"
    )]
    NoFeasiblePair { psi: f64, rho: f64, criterion: f64 },

    #[error("infeasible simulation setting: {0}")]
    InfeasibleSetting(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
