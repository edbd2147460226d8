mod common;

use common::{
    jacobi_eigen, max_dev, random_psd, random_symmetric, rng, soft_offdiag_oracle, svt_oracle,
};
use lrscov_core::linalg::{
    eigendecompose, eigenvalues, norm, operator_norm, soft_threshold_offdiag, svt,
};
use lrscov_core::{Error, NormKind, SymmetricMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn clamp_psd(m: &SymmetricMatrix) -> SymmetricMatrix {
    let eig = eigendecompose(m).unwrap();
    let values: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    lrscov_core::linalg::low_rank_product(m.dim(), &eig.vectors, &values)
}

fn nuclear_objective(x: &SymmetricMatrix, m: &SymmetricMatrix, psi: f64) -> f64 {
    0.5 * (x - m).as_matrix().norm_squared() + psi * x.trace()
}

fn l1_objective(x: &SymmetricMatrix, m: &SymmetricMatrix, rho: f64) -> f64 {
    0.5 * (x - m).as_matrix().norm_squared() + rho * norm(x, NormKind::L1Offdiag).unwrap()
}

#[test]
fn eigenvalues_agree_with_jacobi() {
    let mut r = rng(11);
    for p in [1, 2, 5, 13] {
        let m = random_symmetric(&mut r, p);
        let (oracle, _) = jacobi_eigen(&m);
        let ours = eigenvalues(&m).unwrap();
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "p={p}: {a} vs {b}");
        }
    }
}

#[test]
fn eigendecomposition_is_orthonormal_and_signed() {
    let mut r = rng(12);
    let m = random_symmetric(&mut r, 9);
    let eig = eigendecompose(&m).unwrap();
    let gram = eig.vectors.transpose() * &eig.vectors;
    assert!((gram - DMatrix::<f64>::identity(9, 9)).amax() < 1e-12);
    assert!(eig.reconstruct().max_abs_diff(&m) < 1e-12);
    for col in eig.vectors.column_iter() {
        let lead = col.iter().find(|x| x.abs() > 1e-10).unwrap();
        assert!(*lead > 0.0);
    }
}

#[test]
fn svt_matches_oracle() {
    let mut r = rng(13);
    for k in 0..10 {
        let m = random_symmetric(&mut r, 12);
        let psi = 0.25 * k as f64;
        let out = svt(&m, psi).unwrap();
        assert!(max_dev(&out.matrix, &svt_oracle(&m, psi)) < 1e-10);
        assert_eq!(out.rank, out.values.len());
        assert!(out.values.iter().all(|v| *v > 0.0));
    }
}

#[test]
fn soft_offdiag_matches_oracle() {
    let mut r = rng(14);
    for k in 0..10 {
        let m = random_symmetric(&mut r, 12);
        let rho = 0.2 * k as f64;
        let out = soft_threshold_offdiag(&m, rho).unwrap();
        assert_eq!(max_dev(&out, &soft_offdiag_oracle(&m, rho)), 0.0);
    }
}

#[test]
fn svt_minimizes_its_proximal_objective() {
    let mut r = rng(15);
    for _ in 0..5 {
        let m = random_symmetric(&mut r, 8);
        let psi = 0.4;
        let x = svt(&m, psi).unwrap().matrix;
        let best = nuclear_objective(&x, &m, psi);
        for scale in [1e-3, 1e-2, 1e-1, 1.0] {
            for _ in 0..20 {
                let e = random_symmetric(&mut r, 8).scale(scale);
                let candidate = clamp_psd(&(&x + &e));
                assert!(nuclear_objective(&candidate, &m, psi) >= best - 1e-12);
            }
        }
    }
}

#[test]
fn soft_threshold_minimizes_its_proximal_objective() {
    let mut r = rng(16);
    let m = random_symmetric(&mut r, 8);
    let rho = 0.3;
    let x = soft_threshold_offdiag(&m, rho).unwrap();
    let best = l1_objective(&x, &m, rho);
    for scale in [1e-3, 1e-2, 1e-1, 1.0] {
        for _ in 0..50 {
            let e = random_symmetric(&mut r, 8).scale(scale);
            assert!(l1_objective(&(&x + &e), &m, rho) >= best - 1e-12);
        }
    }
}

#[test]
fn norm_inequalities_on_psd() {
    let mut r = rng(17);
    for k in 1..8 {
        let m = random_psd(&mut r, 10, k);
        let spectral = norm(&m, NormKind::Spectral).unwrap();
        let nuclear = norm(&m, NormKind::Nuclear).unwrap();
        let fro = norm(&m, NormKind::Frobenius).unwrap();
        let max = norm(&m, NormKind::Max).unwrap();
        let l1col = norm(&m, NormKind::L1Column).unwrap();
        assert!(max <= spectral + 1e-12);
        assert!(spectral <= fro + 1e-12);
        assert!(fro <= nuclear + 1e-12);
        assert!(nuclear <= 10f64.sqrt() * fro + 1e-12);
        assert!(spectral <= l1col + 1e-12);
        assert!((nuclear - m.trace()).abs() < 1e-10);
        assert!((spectral - operator_norm(&m).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn counting_norms() {
    let m = SymmetricMatrix::from_row_slice(3, &[1.0, 0.0, -2.0, 0.0, 0.0, 0.5, -2.0, 0.5, 3.0])
        .unwrap();
    assert_eq!(norm(&m, NormKind::L0).unwrap(), 6.0);
    assert_eq!(norm(&m, NormKind::L0Offdiag).unwrap(), 4.0);
    assert_eq!(norm(&m, NormKind::L0Column).unwrap(), 3.0);
    assert_eq!(norm(&m, NormKind::L1Offdiag).unwrap(), 5.0);
    assert_eq!(norm(&m, NormKind::L1Column).unwrap(), 5.5);
    assert_eq!(norm(&m, NormKind::L1).unwrap(), 9.0);
}

#[test]
fn operator_norm_of_indefinite_matrix() {
    let m = SymmetricMatrix::from_diagonal(&[1.0, -4.0]);
    assert_eq!(operator_norm(&m).unwrap(), 4.0);
    assert_eq!(norm(&m, NormKind::Spectral).unwrap(), 1.0);
}

#[test]
fn rejects_asymmetric_and_non_finite_input() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
    assert!(matches!(
        SymmetricMatrix::new(a),
        Err(Error::NotSymmetric { .. })
    ));
    let b = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
    assert!(SymmetricMatrix::new(b).is_err());
    let c = DMatrix::<f64>::zeros(2, 3);
    assert!(matches!(
        SymmetricMatrix::new(c),
        Err(Error::NotSquare { rows: 2, cols: 3 })
    ));
}

#[test]
fn negative_thresholds_are_rejected() {
    let m = SymmetricMatrix::identity(2);
    assert!(svt(&m, -1.0).is_err());
    assert!(soft_threshold_offdiag(&m, -1.0).is_err());
}

fn symmetric_strategy(p: usize) -> impl Strategy<Value = SymmetricMatrix> {
    proptest::collection::vec(-5.0f64..5.0, p * p).prop_map(move |v| {
        let a = DMatrix::from_row_slice(p, p, &v);
        SymmetricMatrix::new((&a + a.transpose()) * 0.5).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svt_output_is_psd_with_shifted_spectrum(m in symmetric_strategy(6), psi in 0.0f64..3.0) {
        let out = svt(&m, psi).unwrap();
        let input = eigenvalues(&m).unwrap();
        let output = eigenvalues(&out.matrix).unwrap();
        for (k, lam) in output.iter().enumerate() {
            let expected = (input[k] - psi).max(0.0);
            prop_assert!((lam - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn soft_threshold_shrinks_and_keeps_signs(m in symmetric_strategy(6), rho in 0.0f64..3.0) {
        let out = soft_threshold_offdiag(&m, rho).unwrap();
        for i in 0..6 {
            prop_assert_eq!(out.get(i, i), m.get(i, i));
            for j in 0..6 {
                if i != j {
                    let (x, y) = (m.get(i, j), out.get(i, j));
                    prop_assert!(y.abs() <= x.abs());
                    prop_assert!(y == 0.0 || y.signum() == x.signum());
                    prop_assert!(((x.abs() - y.abs()) - rho.min(x.abs())).abs() < 1e-12);
                }
            }
        }
    }
}
