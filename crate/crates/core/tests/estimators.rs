mod common;

use common::{gaussian, jacobi_eigen, random_psd, rng};
use lrscov_core::estimators::{
    alce_objective, alce_solve, is_positive_definite, poet_estimate, sample_estimate, unalce,
    unalce_from_alce, AlceSolver, EstimateNote, ThresholdKind,
};
use lrscov_core::linalg::eigenvalues;
use lrscov_core::simgen::{generate_ground_truth, sample_data};
use lrscov_core::{Error, Method, SettingSpec, SolverConfig, SymmetricMatrix};
use nalgebra::DMatrix;

fn setting_one_sample(seed: u64) -> SymmetricMatrix {
    let spec = SettingSpec::preset(1).unwrap().scaled(0.4).unwrap();
    let gt = generate_ground_truth(&spec, seed).unwrap();
    let x = sample_data(&gt, spec.n, seed + 1000).unwrap();
    sample_estimate(&x, false).unwrap()
}

#[test]
fn objective_never_exceeds_the_starting_point() {
    let mut r = rng(21);
    for k in 0..20 {
        let sigma = random_psd(&mut r, 15, 3 + k % 5);
        let (psi, rho) = (0.05 + 0.02 * k as f64, 0.01 + 0.005 * k as f64);
        let cfg = SolverConfig::new(psi, rho);
        let solver = AlceSolver::new(&sigma, cfg).unwrap();
        let start = solver.initial_state();
        let initial = alce_objective(&sigma, &start.l, &start.s, psi, rho).unwrap();
        let (est, _) = alce_solve(&sigma, cfg).unwrap();
        let terminal = alce_objective(
            &sigma,
            &est.low_rank_matrix(),
            est.sparse.entries(),
            psi,
            rho,
        )
        .unwrap();
        assert!(est.converged);
        assert!(terminal <= initial, "case {k}: {terminal} > {initial}");
    }
}

#[test]
fn converged_state_is_nearly_fixed() {
    let sigma = setting_one_sample(3);
    let cfg = SolverConfig::new(0.15, 0.03);
    let solver = AlceSolver::new(&sigma, cfg).unwrap();
    let mut state = solver.initial_state();
    assert!(solver.run(&mut state).unwrap());
    let extra = solver.step(&mut state).unwrap();
    assert!(extra < 2.0 * cfg.epsilon, "extra step moved by {extra}");
}

#[test]
fn solve_is_deterministic() {
    let sigma = setting_one_sample(4);
    let cfg = SolverConfig::new(0.1, 0.02);
    let (a, sa) = alce_solve(&sigma, cfg).unwrap();
    let (b, sb) = alce_solve(&sigma, cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(sa.iter, sb.iter);
    assert_eq!(sa.y_pre, sb.y_pre);
}

#[test]
fn components_sum_to_sigma() {
    let sigma = setting_one_sample(5);
    let (est, state) = alce_solve(&sigma, SolverConfig::new(0.1, 0.02)).unwrap();
    assert!((&est.low_rank_matrix() + est.sparse.entries()).max_abs_diff(&est.sigma) < 1e-12);
    assert_eq!(est.low_rank_matrix(), state.l);
    assert_eq!(est.method, Method::Alce);
    assert_eq!(est.psi, Some(0.1));
}

#[test]
fn invalid_solver_config() {
    let sigma = SymmetricMatrix::identity(3);
    for cfg in [
        SolverConfig::new(-1.0, 0.1),
        SolverConfig::new(0.1, f64::NAN),
        SolverConfig {
            epsilon: 0.0,
            ..SolverConfig::new(0.1, 0.1)
        },
        SolverConfig {
            max_iter: 0,
            ..SolverConfig::new(0.1, 0.1)
        },
    ] {
        assert!(matches!(
            alce_solve(&sigma, cfg),
            Err(Error::InvalidParameter { .. })
        ));
    }
}

#[test]
fn unshrinkage_properties() {
    let sigma = setting_one_sample(6);
    let psi = 0.12;
    let (alce, state) = alce_solve(&sigma, SolverConfig::new(psi, 0.03)).unwrap();
    let un = unalce(&alce, &state).unwrap();
    assert_eq!(un.method, Method::Unalce);
    assert_eq!(un.rank(), alce.rank());
    assert!(alce.rank() > 0);
    let before = eigenvalues(&alce.low_rank_matrix()).unwrap();
    let after = eigenvalues(&un.low_rank_matrix()).unwrap();
    for k in 0..un.rank() {
        assert!((after[k] - before[k] - psi).abs() < 1e-10);
    }
    for i in 0..sigma.dim() {
        assert_eq!(un.sigma.get(i, i), alce.sigma.get(i, i));
        for j in 0..sigma.dim() {
            if i != j {
                assert_eq!(un.sparse.sign(i, j), alce.sparse.sign(i, j));
                assert_eq!(
                    un.sparse.entries().get(i, j),
                    alce.sparse.entries().get(i, j)
                );
            }
        }
    }
    assert_eq!(un.sparse.support(), alce.sparse.support());
    assert!(un.notes.is_empty());
}

#[test]
fn unshrinkage_with_custom_shift_is_tagged() {
    let sigma = setting_one_sample(7);
    let (alce, state) = alce_solve(&sigma, SolverConfig::new(0.12, 0.03)).unwrap();
    let un = unalce_from_alce(&alce, &state, 0.05).unwrap();
    assert!(un.has_note(EstimateNote::NonCanonicalShift));
    assert!(unalce_from_alce(&alce, &state, 0.0).is_err());
    assert!(unalce(&un, &state).is_err());
}

#[test]
fn unshrinkage_of_rank_zero_is_identity() {
    let sigma = SymmetricMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
    let (alce, state) = alce_solve(&sigma, SolverConfig::new(10.0, 0.1)).unwrap();
    assert_eq!(alce.rank(), 0);
    let un = unalce(&alce, &state).unwrap();
    assert!(un.has_note(EstimateNote::NothingToUnshrink));
    assert_eq!(un.sigma, alce.sigma);
}

#[test]
fn poet_low_rank_matches_truncated_oracle() {
    let mut r = rng(22);
    let sigma = random_psd(&mut r, 10, 20);
    let (values, vectors) = jacobi_eigen(&sigma);
    for rank in 0..4 {
        let est = poet_estimate(&sigma, rank, 0.0, ThresholdKind::Soft).unwrap();
        let l = est.low_rank_matrix();
        for i in 0..10 {
            for j in 0..10 {
                let oracle: f64 = (0..rank)
                    .map(|k| values[k] * vectors[k][i] * vectors[k][j])
                    .sum();
                assert!((l.get(i, j) - oracle).abs() < 1e-10);
            }
        }
        assert_eq!(est.sigma, sigma);
    }
}

#[test]
fn poet_support_shrinks_with_threshold() {
    let sigma = setting_one_sample(8);
    for kind in [
        ThresholdKind::Soft,
        ThresholdKind::Hard,
        ThresholdKind::SoftCorrelation,
        ThresholdKind::HardCorrelation,
    ] {
        let mut last = usize::MAX;
        for k in 0..8 {
            let est = poet_estimate(&sigma, 4, 0.01 * k as f64, kind).unwrap();
            assert!(est.sparse.nonzeros() <= last);
            last = est.sparse.nonzeros();
            assert_eq!(est.method, Method::Poet);
            assert_eq!(est.psi, None);
        }
    }
    let soft = poet_estimate(&sigma, 4, 0.03, ThresholdKind::Soft).unwrap();
    let hard = poet_estimate(&sigma, 4, 0.03, ThresholdKind::Hard).unwrap();
    assert_eq!(soft.sparse.support(), hard.sparse.support());
}

#[test]
fn poet_rejects_excess_rank() {
    let sigma = SymmetricMatrix::identity(3);
    assert!(matches!(
        poet_estimate(&sigma, 4, 0.1, ThresholdKind::Soft),
        Err(Error::RankTooLarge { rank: 4, dim: 3 })
    ));
}

#[test]
fn sample_covariance_matches_loops() {
    let mut r = rng(23);
    let x: DMatrix<f64> = gaussian(&mut r, 30, 5).add_scalar(2.0);
    for center in [false, true] {
        let s = sample_estimate(&x, center).unwrap();
        let means: Vec<f64> = (0..5)
            .map(|j| {
                if center {
                    x.column(j).sum() / 30.0
                } else {
                    0.0
                }
            })
            .collect();
        for i in 0..5 {
            for j in 0..5 {
                let mut acc = 0.0;
                for k in 0..30 {
                    acc += (x[(k, i)] - means[i]) * (x[(k, j)] - means[j]);
                }
                assert!((s.get(i, j) - acc / 29.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn sample_covariance_errors() {
    let mut x = DMatrix::from_element(4, 2, 1.0);
    x[(2, 1)] = f64::INFINITY;
    assert!(matches!(
        sample_estimate(&x, false),
        Err(Error::NonFinite { row: 2, col: 1 })
    ));
}

#[test]
fn estimates_are_positive_definite_on_simulated_data() {
    let sigma = setting_one_sample(9);
    assert!(is_positive_definite(&sigma, 0.0));
    let (alce, state) = alce_solve(&sigma, SolverConfig::new(0.15, 0.03)).unwrap();
    assert!(is_positive_definite(&alce.sigma, 0.0));
    assert!(is_positive_definite(
        &unalce(&alce, &state).unwrap().sigma,
        0.0
    ));
}
