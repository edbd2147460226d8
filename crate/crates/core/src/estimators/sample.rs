use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, SymmetricMatrix};

/// Unbiased sample covariance of an `n x p` data matrix (rows are
/// observations), divisor `n - 1`. With `center` the column means are removed
/// first; otherwise the data are taken as already centered.
pub fn sample_estimate(data: &DMatrix<f64>, center: bool) -> Result<SymmetricMatrix> {
    let (n, p) = data.shape();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: n,
        });
    }
    if p == 0 {
        return Err(Error::EmptyMatrix);
    }
    if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            row: idx % n,
            col: idx / n,
        });
    }
    let cov = if center {
        let mut centered = data.clone();
        for mut col in centered.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        centered.tr_mul(&centered)
    } else {
        data.tr_mul(data)
    };
    Ok(SymmetricMatrix::symmetrize(cov / (n as f64 - 1.0)))
}

/// `lambda_min(m) > tol`. An eigensolver failure counts as not positive definite.
pub fn is_positive_definite(m: &SymmetricMatrix, tol: f64) -> bool {
    matches!(linalg::min_eigenvalue(m), Ok(v) if v > tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows_divisor_one() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let s = sample_estimate(&x, false).unwrap();
        assert_eq!(s, SymmetricMatrix::from_diagonal(&[2.0, 0.0]));
    }

    #[test]
    fn constant_column_gives_zero_row() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 4.0, 5.0]);
        let s = sample_estimate(&x, true).unwrap();
        assert_eq!(s.get(1, 1), 0.0);
        assert_eq!(s.get(0, 1), 0.0);
    }

    #[test]
    fn needs_two_rows() {
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(matches!(
            sample_estimate(&x, false),
            Err(Error::InsufficientData {
                required: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn pd_checks() {
        assert!(is_positive_definite(&SymmetricMatrix::identity(3), 0.0));
        assert!(!is_positive_definite(
            &SymmetricMatrix::from_diagonal(&[1.0, 0.0]),
            0.0
        ));
    }
}
