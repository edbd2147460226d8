#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use lrscov_core::SymmetricMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, p: usize) -> SymmetricMatrix {
    let a = gaussian(rng, p, p);
    SymmetricMatrix::new((&a + a.transpose()) * 0.5).unwrap()
}

/// Wishart-like PSD matrix `A A' / k` plus a small ridge.
pub fn random_psd(rng: &mut ChaCha8Rng, p: usize, k: usize) -> SymmetricMatrix {
    let a = gaussian(rng, p, k);
    let m = &a * a.transpose() / k as f64 + DMatrix::identity(p, p) * 0.05;
    SymmetricMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

/// Cyclic Jacobi eigensolver on plain row-major storage. Returns eigenvalues
/// sorted descending and the matching eigenvectors as columns.
pub fn jacobi_eigen(m: &SymmetricMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = m.dim();
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| m.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        if off < 1e-30 {
            break;
        }
        for k in 0..p {
            for l in (k + 1)..p {
                if a[k][l].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[l][l] - a[k][k]) / (2.0 * a[k][l]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..p {
                    let aik = a[i][k];
                    let ail = a[i][l];
                    a[i][k] = c * aik - s * ail;
                    a[i][l] = s * aik + c * ail;
                }
                for j in 0..p {
                    let akj = a[k][j];
                    let alj = a[l][j];
                    a[k][j] = c * akj - s * alj;
                    a[l][j] = s * akj + c * alj;
                }
                for i in 0..p {
                    let vik = v[i][k];
                    let vil = v[i][l];
                    v[i][k] = c * vik - s * vil;
                    v[i][l] = s * vik + c * vil;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&x, &y| a[y][y].partial_cmp(&a[x][x]).unwrap());
    let values = idx.iter().map(|&k| a[k][k]).collect();
    let vectors = idx
        .iter()
        .map(|&k| (0..p).map(|i| v[i][k]).collect())
        .collect();
    (values, vectors)
}

/// Singular value thresholding by the Jacobi oracle, entry by entry.
pub fn svt_oracle(m: &SymmetricMatrix, psi: f64) -> Vec<Vec<f64>> {
    let p = m.dim();
    let (values, vectors) = jacobi_eigen(m);
    let mut out = vec![vec![0.0; p]; p];
    for (lam, u) in values.iter().zip(&vectors) {
        let d = lam - psi;
        if d <= 0.0 {
            continue;
        }
        for i in 0..p {
            for j in 0..p {
                out[i][j] += d * u[i] * u[j];
            }
        }
    }
    out
}

/// Element-wise soft thresholding of off-diagonal entries, written out.
pub fn soft_offdiag_oracle(m: &SymmetricMatrix, rho: f64) -> Vec<Vec<f64>> {
    let p = m.dim();
    let mut out = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            let x = m.get(i, j);
            out[i][j] = if i == j {
                x
            } else if x > rho {
                x - rho
            } else if x < -rho {
                x + rho
            } else {
                0.0
            };
        }
    }
    out
}

pub fn max_dev(a: &SymmetricMatrix, b: &[Vec<f64>]) -> f64 {
    let p = a.dim();
    let mut worst = 0.0_f64;
    for i in 0..p {
        for j in 0..p {
            worst = worst.max((a.get(i, j) - b[i][j]).abs());
        }
    }
    worst
}

/// Brute-force classification counts over the pairs `i < j`, from sign
/// patterns: `(nz, tp, tn, fp, fn, fpos, fneg, truth_pos, truth_neg, pos_hits, neg_hits)`.
pub fn classification_oracle(est: &[Vec<i8>], truth: &[Vec<i8>]) -> [usize; 11] {
    let p = est.len();
    let mut pairs = Vec::new();
    for i in 0..p {
        for j in 0..p {
            if i < j {
                pairs.push((est[i][j], truth[i][j]));
            }
        }
    }
    let count = |f: &dyn Fn(i8, i8) -> bool| pairs.iter().filter(|(e, t)| f(*e, *t)).count();
    [
        count(&|e, _| e != 0),
        count(&|e, t| e != 0 && t != 0),
        count(&|e, t| e == 0 && t == 0),
        count(&|e, t| e != 0 && t == 0),
        count(&|e, t| e == 0 && t != 0),
        count(&|e, t| t > 0 && e < 0),
        count(&|e, t| t < 0 && e > 0),
        count(&|_, t| t > 0),
        count(&|_, t| t < 0),
        count(&|e, t| t > 0 && e > 0),
        count(&|e, t| t < 0 && e < 0),
    ]
}

/// Random sign pattern with a unit diagonal, as a matrix with values of
/// varying magnitude.
pub fn random_pattern(
    rng: &mut ChaCha8Rng,
    p: usize,
    density: f64,
) -> (Vec<Vec<i8>>, SymmetricMatrix) {
    let mut signs = vec![vec![0i8; p]; p];
    let mut m = SymmetricMatrix::identity(p);
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random::<f64>() < density {
                let s: i8 = if rng.random::<bool>() { 1 } else { -1 };
                signs[i][j] = s;
                signs[j][i] = s;
                m.set(i, j, s as f64 * rng.random_range(0.01..1.0));
            }
        }
    }
    (signs, m)
}
