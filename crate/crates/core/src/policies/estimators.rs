use super::{PolicyConfig, PolicyState, Variant};
use crate::hierarchy::Hierarchy;
use crate::{Error, RealVector, Result};

/// `w̃_t = M̃_t⁻¹ X̃_tY_tᵀ`, the ridge estimate in the subspace.
pub fn coarse_estimate(state: &PolicyState, _h: &Hierarchy, cfg: &PolicyConfig) -> Result<RealVector> {
    let coarse = state.coarse.as_ref().ok_or_else(|| Error::InvalidConfig(format!("{} keeps no coarse state", cfg.variant)))?;
    Ok(coarse.solve_toward(None))
}

/// `w_t = M_t⁻¹(X_tY_tᵀ + λ U w̃_t)`, the full-space estimate shrunk toward the lifted coarse one.
pub fn fine_estimate(state: &PolicyState, w_tilde: &RealVector, h: &Hierarchy, cfg: &PolicyConfig) -> Result<RealVector> {
    if !cfg.variant.is_hierarchical() {
        return Err(Error::InvalidConfig(format!("{} has no fine estimate", cfg.variant)));
    }
    if w_tilde.len() != h.k() {
        return Err(Error::dims(format!("w̃ has {} entries, K = {}", w_tilde.len(), h.k())));
    }
    let prior = &h.u * w_tilde;
    Ok(state.full.solve_toward(Some(&prior)))
}

/// Single-space ridge estimates for the LinUCB baselines.
///
/// Naive, Reshape and SubspaceUCB shrink toward zero in their own feature
/// space; MeanRegularized shrinks toward `w̄`.
pub fn baseline_estimate(state: &PolicyState, cfg: &PolicyConfig, _h: &Hierarchy) -> Result<RealVector> {
    match cfg.variant {
        Variant::NaiveLinUCB | Variant::Reshape | Variant::SubspaceUCB => Ok(state.full.solve_toward(None)),
        Variant::MeanRegularized => {
            let w_bar = cfg.w_bar.as_ref().ok_or(Error::MissingMeanProfile)?;
            Ok(state.full.solve_toward(Some(w_bar)))
        }
        Variant::CoFine | Variant::CoFineFocus => Err(Error::InvalidConfig(format!("{} is not a baseline", cfg.variant))),
    }
}
