//! Dense symmetric matrix primitives.
//!
//! [`SymmetricMatrix`] is the common currency of the crate: sample covariances,
//! targets and both estimated components are all stored as dense symmetric
//! matrices. The module also hosts the matrix norms, a deterministic symmetric
//! eigendecomposition, and the two proximal maps used by the solver: eigenvalue
//! thresholding (the nuclear-norm prox restricted to PSD matrices) and
//! off-diagonal soft thresholding (the prox of the off-diagonal l1 norm).

use alloc::vec::Vec;
use core::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Entries with magnitude below this are treated as exact zeros by the l0 norms
/// and the support sets.
pub const ZERO_TOL: f64 = 1e-12;

/// Relative asymmetry tolerated when validating user-supplied matrices.
pub const SYMMETRY_TOL: f64 = 1e-8;

const EIGEN_MAX_ITER: usize = 10_000;

#[inline]
pub(crate) fn is_zero(x: f64) -> bool {
    x.abs() < ZERO_TOL
}

/// A dense, exactly symmetric `p x p` matrix with `p >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    inner: DMatrix<f64>,
}

impl SymmetricMatrix {
    /// Validates `m` as square, finite and symmetric within [`SYMMETRY_TOL`]
    /// (relative to its largest entry), then stores its exact symmetrization.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let max_abs = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        let asym = max_asymmetry(&m)?;
        if asym > SYMMETRY_TOL * max_abs.max(1.0) {
            return Err(Error::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        Ok(Self::symmetrize(m))
    }

    /// Builds from a row-major slice of length `dim * dim`.
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds from the upper triangle produced by `f(i, j)` for `i <= j`.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { inner: m }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "dimension must be at least 1");
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    /// Averages `m` with its transpose, which makes the result exactly
    /// symmetric. Panics on a non-square or empty input.
    pub(crate) fn symmetrize(mut m: DMatrix<f64>) -> Self {
        let p = m.nrows();
        assert!(p >= 1 && m.ncols() == p, "square non-empty matrix required");
        for j in 0..p {
            for i in 0..j {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { inner: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Sets entries `(i, j)` and `(j, i)` together.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.inner[(i, j)] = value;
        self.inner[(j, i)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner[(i, i)]).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            inner: &self.inner * factor,
        }
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let p = self.dim();
        let mut out = Vec::with_capacity(p * p);
        for i in 0..p {
            for j in 0..p {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    /// Off-diagonal index pairs `(i, j)` with `i < j` whose entry is nonzero.
    pub fn offdiag_support(&self) -> Vec<(usize, usize)> {
        let p = self.dim();
        let mut out = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                if !is_zero(self.inner[(i, j)]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn frobenius_distance(&self, other: &SymmetricMatrix) -> f64 {
        (&self.inner - &other.inner).norm()
    }

    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    fn check_same_dim(&self, other: &SymmetricMatrix) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
    }
}

/// Largest `|m_ij - m_ji|`; errors on non-square, empty or non-finite input.
pub fn max_asymmetry(m: &DMatrix<f64>) -> Result<f64> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut worst = 0.0_f64;
    for j in 0..cols {
        for i in 0..rows {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if i < j {
                worst = worst.max((v - m[(j, i)]).abs());
            }
        }
    }
    Ok(worst)
}

impl Add for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn add(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        self.check_same_dim(rhs);
        SymmetricMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn sub(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        self.check_same_dim(rhs);
        SymmetricMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

/// Matrix norms. Element-wise norms sum or count over all entries;
/// the `*Column` norms take the maximum over rows of the row-wise count or
/// absolute sum; `*Offdiag` variants exclude the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L0,
    L1,
    Frobenius,
    Max,
    L0Column,
    L1Column,
    /// Largest eigenvalue, the PSD specialization of the spectral norm.
    Spectral,
    /// Sum of eigenvalues, the PSD specialization of the nuclear norm.
    Nuclear,
    L1Offdiag,
    L0Offdiag,
}

pub fn norm(m: &SymmetricMatrix, kind: NormKind) -> Result<f64> {
    let a = m.as_matrix();
    let p = m.dim();
    let value = match kind {
        NormKind::L0 => a.iter().filter(|x| !is_zero(**x)).count() as f64,
        NormKind::L1 => a.iter().map(|x| x.abs()).sum(),
        NormKind::Frobenius => a.norm(),
        NormKind::Max => a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())),
        NormKind::L0Column => (0..p)
            .map(|i| (0..p).filter(|&j| !is_zero(a[(i, j)])).count())
            .max()
            .unwrap_or(0) as f64,
        NormKind::L1Column => (0..p)
            .map(|i| (0..p).map(|j| a[(i, j)].abs()).sum::<f64>())
            .fold(0.0_f64, f64::max),
        NormKind::Spectral => eigenvalues(m)?[0],
        NormKind::Nuclear => eigenvalues(m)?.iter().sum(),
        NormKind::L1Offdiag => {
            let mut s = 0.0;
            for i in 0..p {
                for j in 0..p {
                    if i != j {
                        s += a[(i, j)].abs();
                    }
                }
            }
            s
        }
        NormKind::L0Offdiag => {
            let mut c = 0usize;
            for i in 0..p {
                for j in 0..p {
                    if i != j && !is_zero(a[(i, j)]) {
                        c += 1;
                    }
                }
            }
            c as f64
        }
    };
    Ok(value)
}

/// Operator 2-norm `max_i |lambda_i|`, the spectral norm for indefinite
/// matrices such as estimation errors.
pub fn operator_norm(m: &SymmetricMatrix) -> Result<f64> {
    let values = eigenvalues(m)?;
    Ok(values[0].abs().max(values[values.len() - 1].abs()))
}

/// Eigenpairs of a symmetric matrix, values sorted non-increasing.
///
/// Each eigenvector is normalized so that its first coordinate that is not
/// numerically zero is positive, which makes the decomposition reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let scaled = &self.vectors * DMatrix::from_diagonal(&self.values);
        SymmetricMatrix::symmetrize(scaled * self.vectors.transpose())
    }
}

pub fn eigendecompose(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let p = m.dim();
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| eigen_failure(m))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(eigen_failure(m));
    }

    let mut order: Vec<usize> = (0..p).collect();
    // Stable sort with an index tie-break keeps the output deterministic.
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut vectors = DMatrix::zeros(p, p);
    let mut values = DVector::zeros(p);
    for (k, &src) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        let lead = col.iter().copied().find(|x| x.abs() > 1e-10).unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for i in 0..p {
            vectors[(i, k)] = sign * col[i];
        }
    }
    Ok(EigenDecomposition { vectors, values })
}

/// Eigenvalues only, sorted non-increasing.
pub fn eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = m
        .as_matrix()
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| eigen_failure(m))?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(eigen_failure(m));
    }
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    Ok(values)
}

pub fn min_eigenvalue(m: &SymmetricMatrix) -> Result<f64> {
    let values = eigenvalues(m)?;
    Ok(values[values.len() - 1])
}

fn eigen_failure(m: &SymmetricMatrix) -> Error {
    let a = m.as_matrix();
    let diag = m.diagonal();
    Error::EigenFailure {
        dim: m.dim(),
        max_abs: a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())),
        diag_min: diag.iter().copied().fold(f64::INFINITY, f64::min),
        diag_max: diag.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Output of [`svt`]: the thresholded matrix and its retained eigenpairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SvtOutput {
    pub matrix: SymmetricMatrix,
    pub rank: usize,
    /// `p x rank`, orthonormal columns.
    pub vectors: DMatrix<f64>,
    /// Thresholded eigenvalues `lambda_i - psi`, all positive, descending.
    pub values: DVector<f64>,
}

/// Eigenvalue thresholding: subtract `psi` from every eigenvalue, clamp at
/// zero and rebuild from the surviving eigenpairs.
pub fn svt(m: &SymmetricMatrix, psi: f64) -> Result<SvtOutput> {
    if !(psi >= 0.0) {
        return Err(crate::error::invalid("psi", "must be non-negative"));
    }
    let eig = eigendecompose(m)?;
    let rank = eig.values.iter().take_while(|&&v| v > psi).count();
    let vectors = eig.vectors.columns(0, rank).into_owned();
    let values = DVector::from_iterator(rank, eig.values.iter().take(rank).map(|v| v - psi));
    let matrix = low_rank_product(m.dim(), &vectors, values.as_slice());
    Ok(SvtOutput {
        matrix,
        rank,
        vectors,
        values,
    })
}

/// `U diag(d) U^T` for a `p x r` factor; the zero matrix when `r == 0`.
pub fn low_rank_product(dim: usize, vectors: &DMatrix<f64>, values: &[f64]) -> SymmetricMatrix {
    if values.is_empty() {
        return SymmetricMatrix::zeros(dim);
    }
    let mut scaled = vectors.clone();
    for (k, &d) in values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(d);
    }
    SymmetricMatrix::symmetrize(scaled * vectors.transpose())
}

#[inline]
pub fn soft_threshold(x: f64, level: f64) -> f64 {
    let shrunk = x.abs() - level;
    if shrunk > 0.0 {
        x.signum() * shrunk
    } else {
        0.0
    }
}

#[inline]
pub fn hard_threshold(x: f64, level: f64) -> f64 {
    if x.abs() > level {
        x
    } else {
        0.0
    }
}

/// Soft thresholding of the off-diagonal entries at level `rho`; the diagonal
/// is copied through unchanged.
pub fn soft_threshold_offdiag(m: &SymmetricMatrix, rho: f64) -> Result<SymmetricMatrix> {
    if !(rho >= 0.0) {
        return Err(crate::error::invalid("rho", "must be non-negative"));
    }
    Ok(map_offdiag(m, |_, _, x| soft_threshold(x, rho)))
}

/// Applies `f(i, j, m_ij)` to every upper off-diagonal entry and mirrors it.
pub fn map_offdiag(
    m: &SymmetricMatrix,
    mut f: impl FnMut(usize, usize, f64) -> f64,
) -> SymmetricMatrix {
    let mut out = m.clone();
    let p = m.dim();
    for j in 0..p {
        for i in 0..j {
            out.set(i, j, f(i, j, m.get(i, j)));
        }
    }
    out
}
