//! Confidence widths.
//!
//! | term                               | source of uncertainty         |
//! |------------------------------------|-------------------------------|
//! | `α^{(v)} ‖x‖_{M⁻¹}`                | feedback variance, full space |
//! | `α̃^{(v)} ‖UᵀM⁻¹x‖_{M̃⁻¹}`          | feedback variance, subspace   |
//! | `α^{(b)} ‖M⁻¹x‖`                   | regularization bias, full     |
//! | `α̃^{(b)} ‖M̃⁻¹UᵀM⁻¹x‖`             | regularization bias, subspace |

use super::{feature_map, PolicyConfig, PolicyState, RidgeState, Variant};
use crate::hierarchy::Hierarchy;
use crate::{Error, RealVector, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConfidenceCoefficients {
    pub alpha_v: f64,
    pub alpha_b: f64,
    pub alpha_v_tilde: f64,
    pub alpha_b_tilde: f64,
}

/// `√(log(det(M)^{1/2} det(λI)^{∓1/2} / δ))`, clamped at zero.
fn variance_coefficient(ridge: &RidgeState, delta: f64, literal: bool) -> f64 {
    let (ln_det, ln_det_prior) = ridge.ln_dets();
    let ln_ratio = if literal { ln_det + ln_det_prior } else { ln_det - ln_det_prior };
    (0.5 * ln_ratio - delta.ln()).max(0.0).sqrt()
}

pub fn confidence_coefficients(state: &PolicyState, cfg: &PolicyConfig) -> ConfidenceCoefficients {
    let literal = cfg.literal_constants;
    let alpha_v = variance_coefficient(&state.full, cfg.delta, literal);
    match cfg.variant {
        Variant::CoFine | Variant::CoFineFocus => {
            let lambda = cfg.lambda;
            let lt = cfg.lambda_tilde;
            let coarse_v = state.coarse.as_ref().map_or(0.0, |c| variance_coefficient(c, cfg.delta, literal));
            ConfidenceCoefficients {
                alpha_v,
                alpha_b: (2.0 * lambda).sqrt() * cfg.s_perp_bound,
                alpha_v_tilde: lambda * coarse_v,
                alpha_b_tilde: if literal { lambda * lt * cfg.s_tilde_bound } else { lambda * lt.sqrt() * cfg.s_tilde_bound },
            }
        }
        // The λ → ∞ limit of the coarse width: λ·UᵀM⁻¹x → Uᵀx.
        Variant::SubspaceUCB => {
            let lt = cfg.lambda_tilde;
            ConfidenceCoefficients {
                alpha_v,
                alpha_b: if literal { lt * cfg.s_tilde_bound } else { lt.sqrt() * cfg.s_tilde_bound },
                ..Default::default()
            }
        }
        Variant::NaiveLinUCB | Variant::MeanRegularized | Variant::Reshape => {
            ConfidenceCoefficients { alpha_v, alpha_b: (2.0 * cfg.lambda).sqrt() * cfg.s_bound, ..Default::default() }
        }
    }
}

/// `(c_t(x), c̃_t(x))` for a raw context `x`.
///
/// `c_t` carries the exploration scale `η` for the CoFine variants. Single-space
/// baselines report their whole width in the first slot.
pub fn confidence_widths(state: &PolicyState, x: &RealVector, h: &Hierarchy, cfg: &PolicyConfig) -> Result<(f64, f64)> {
    let z = feature_map(x, h, cfg.variant)?;
    widths_in_policy_coords(state, &z, h, cfg)
}

pub(super) fn widths_in_policy_coords(
    state: &PolicyState,
    z: &RealVector,
    h: &Hierarchy,
    cfg: &PolicyConfig,
) -> Result<(f64, f64)> {
    if z.len() != state.full.dim() {
        return Err(Error::dims(format!("context has {} entries, state dim {}", z.len(), state.full.dim())));
    }
    let coef = confidence_coefficients(state, cfg);
    let factor = state.full.factor();
    let m_inv_x = factor.solve_vec(z);
    let full = coef.alpha_v * factor.inv_quad(z).sqrt() + coef.alpha_b * m_inv_x.norm();

    match (&state.coarse, cfg.variant.is_hierarchical()) {
        (Some(coarse), true) => {
            let proj = h.u.tr_mul(&m_inv_x);
            let cf = coarse.factor();
            let coarse_width = coef.alpha_v_tilde * cf.inv_quad(&proj).sqrt() + coef.alpha_b_tilde * cf.solve_vec(&proj).norm();
            Ok((cfg.explore_scale * full, coarse_width))
        }
        _ => Ok((full, 0.0)),
    }
}
