use crate::error::{invalid, Result};
use crate::linalg::SymmetricMatrix;

use super::{Estimate, EstimateNote, LowRankComponent, Method, SolverState, SparseComponent};

/// Unshrinkage with the canonical shift, the `psi` of the ALCE solve.
pub fn unalce(alce: &Estimate, state: &SolverState) -> Result<Estimate> {
    let psi = alce
        .psi
        .ok_or_else(|| invalid("alce", "estimate carries no nuclear threshold"))?;
    unalce_from_alce(alce, state, psi)
}

/// Re-adds `psi_breve` to every retained eigenvalue of the ALCE low-rank part,
/// keeping its eigenvectors, and moves the corresponding diagonal mass out of
/// the sparse part so that `diag(Sigma)` is unchanged.
///
/// The off-diagonal of the sparse part, the rank and the support are left
/// untouched. A rank-zero input comes back unchanged, tagged
/// [`EstimateNote::NothingToUnshrink`]. A shift other than the solve's `psi`
/// is allowed and tagged [`EstimateNote::NonCanonicalShift`].
pub fn unalce_from_alce(alce: &Estimate, state: &SolverState, psi_breve: f64) -> Result<Estimate> {
    if alce.method != Method::Alce {
        return Err(invalid(
            "alce",
            "unshrinkage applies to ALCE estimates only",
        ));
    }
    if !(psi_breve > 0.0 && psi_breve.is_finite()) {
        return Err(invalid("psi_breve", "must be a positive finite number"));
    }
    // The re-optimization is conditional on the final gradient-step points;
    // only their dimension enters the computation.
    if state.y_pre.dim() != alce.dim() || state.z_pre.dim() != alce.dim() {
        return Err(crate::error::Error::DimensionMismatch {
            expected: alce.dim(),
            actual: state.y_pre.dim(),
        });
    }

    let mut out = alce.clone();
    out.method = Method::Unalce;
    if alce.psi != Some(psi_breve) {
        out.notes.push(EstimateNote::NonCanonicalShift);
    }
    if alce.rank() == 0 {
        out.notes.push(EstimateNote::NothingToUnshrink);
        return Ok(out);
    }

    let shifted = alce.low_rank.values.map(|d| d + psi_breve);
    let low_rank = LowRankComponent {
        vectors: alce.low_rank.vectors.clone(),
        values: shifted,
    };
    let l_new = low_rank.reconstruct();

    let p = alce.dim();
    let mut s_new: SymmetricMatrix = alce.sparse.entries().clone();
    let mut sigma_new = &l_new + &s_new;
    for i in 0..p {
        let total = alce.sigma.get(i, i);
        s_new.set(i, i, total - l_new.get(i, i));
        // Keep the diagonal of Sigma bit-for-bit.
        sigma_new.set(i, i, total);
    }

    out.low_rank = low_rank;
    out.sparse = SparseComponent::new(s_new);
    out.sigma = sigma_new;
    Ok(out)
}
