use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, NormKind, SymmetricMatrix};

use super::{Estimate, EstimateNote, LowRankComponent, Method, SolverConfig, SparseComponent};

/// Iterates of the accelerated proximal scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub l: SymmetricMatrix,
    pub s: SymmetricMatrix,
    /// Extrapolated low-rank point.
    pub y: SymmetricMatrix,
    /// Extrapolated sparse point.
    pub z: SymmetricMatrix,
    pub eta: f64,
    pub iter: usize,
    /// Gradient-step points `Y - G/2`, `Z - G/2` of the latest iteration.
    pub y_pre: SymmetricMatrix,
    pub z_pre: SymmetricMatrix,
    /// Retained eigenpairs of `l`.
    pub low_rank: LowRankComponent,
    /// Convergence-criterion value of the latest iteration.
    pub criterion: f64,
}

/// Momentum recursion `eta_t = (1 + sqrt(1 + 4 eta_{t-1}^2)) / 2`.
#[inline]
pub fn next_momentum(eta: f64) -> f64 {
    0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * eta * eta))
}

/// `1/2 ||L + S - Sigma_n||_F^2 + psi ||L||_* + rho ||S||_{1,off}`.
pub fn alce_objective(
    sigma_n: &SymmetricMatrix,
    l: &SymmetricMatrix,
    s: &SymmetricMatrix,
    psi: f64,
    rho: f64,
) -> Result<f64> {
    let fit = (&(l + s) - sigma_n).as_matrix().norm_squared();
    Ok(0.5 * fit
        + psi * linalg::norm(l, NormKind::Nuclear)?
        + rho * linalg::norm(s, NormKind::L1Offdiag)?)
}

/// Step-by-step driver for the ALCE iteration on a fixed `Sigma_n`.
#[derive(Debug, Clone)]
pub struct AlceSolver<'a> {
    sigma_n: &'a SymmetricMatrix,
    cfg: SolverConfig,
}

impl<'a> AlceSolver<'a> {
    pub fn new(sigma_n: &'a SymmetricMatrix, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { sigma_n, cfg })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// `L_0 = S_0 = diag(Sigma_n) / 2`, `Y_0 = L_0`, `Z_0 = S_0`, `eta_0 = 1`.
    pub fn initial_state(&self) -> SolverState {
        let half_diag: Vec<f64> = self.sigma_n.diagonal().iter().map(|d| 0.5 * d).collect();
        let start = SymmetricMatrix::from_diagonal(&half_diag);
        SolverState {
            l: start.clone(),
            s: start.clone(),
            y: start.clone(),
            z: start.clone(),
            eta: 1.0,
            iter: 0,
            y_pre: start.clone(),
            z_pre: start,
            low_rank: LowRankComponent::empty(self.sigma_n.dim()),
            criterion: f64::INFINITY,
        }
    }

    /// One proximal-gradient step with momentum; returns the relative-change
    /// criterion between the new and previous `(L, S)`.
    pub fn step(&self, state: &mut SolverState) -> Result<f64> {
        let p = self.sigma_n.dim();
        if state.l.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: state.l.dim(),
            });
        }
        // Both blocks share the gradient Y + Z - Sigma_n; step size 1/2.
        let half_grad = (&(&state.y + &state.z) - self.sigma_n).scale(0.5);
        let y_pre = &state.y - &half_grad;
        let z_pre = &state.z - &half_grad;

        let svt = linalg::svt(&y_pre, self.cfg.psi)?;
        let l_new = svt.matrix;
        let s_new = linalg::soft_threshold_offdiag(&z_pre, self.cfg.rho)?;

        let eta_new = next_momentum(state.eta);
        let weight = (state.eta - 1.0) / eta_new;
        let dl = &l_new - &state.l;
        let ds = &s_new - &state.s;
        let criterion = dl.as_matrix().norm() / (1.0 + state.l.as_matrix().norm())
            + ds.as_matrix().norm() / (1.0 + state.s.as_matrix().norm());

        state.y = &l_new + &dl.scale(weight);
        state.z = &s_new + &ds.scale(weight);
        state.l = l_new;
        state.s = s_new;
        state.eta = eta_new;
        state.iter += 1;
        state.y_pre = y_pre;
        state.z_pre = z_pre;
        state.low_rank = LowRankComponent {
            vectors: svt.vectors,
            values: svt.values,
        };
        state.criterion = criterion;
        Ok(criterion)
    }

    /// Iterates until the criterion drops to `epsilon` or `max_iter` steps.
    pub fn run(&self, state: &mut SolverState) -> Result<bool> {
        while state.iter < self.cfg.max_iter {
            if self.step(state)? <= self.cfg.epsilon {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn estimate_from(&self, state: &SolverState, converged: bool) -> Estimate {
        let sparse = SparseComponent::new(state.s.clone());
        let sigma = &state.l + &state.s;
        let mut notes = Vec::new();
        if !converged {
            notes.push(EstimateNote::NotConverged);
        }
        Estimate {
            low_rank: state.low_rank.clone(),
            sparse,
            sigma,
            method: Method::Alce,
            psi: Some(self.cfg.psi),
            rho: self.cfg.rho,
            solver_iters: state.iter,
            converged,
            notes,
        }
    }
}

/// Solves the ALCE problem from the standard starting point. Hitting
/// `max_iter` is not an error: the last iterate comes back with
/// `converged == false`.
pub fn alce_solve(sigma_n: &SymmetricMatrix, cfg: SolverConfig) -> Result<(Estimate, SolverState)> {
    let solver = AlceSolver::new(sigma_n, cfg)?;
    let mut state = solver.initial_state();
    let converged = solver.run(&mut state)?;
    let estimate = solver.estimate_from(&state, converged);
    Ok((estimate, state))
}
