//! Bandit policies behind one select/update contract.
//!
//! [`Variant::CoFine`] keeps two ridge estimates: a coarse one in the
//! `K`-dimensional subspace (`w̃_t = M̃_t⁻¹ X̃_tY_tᵀ`) and a full-space one
//! shrunk toward its lift (`w_t = M_t⁻¹(X_tY_tᵀ + λUw̃_t)`). It plays the action
//! maximising `w_tᵀx + c_t(x) + c̃_t(x)`, where `c_t` covers variance and bias
//! in the full space and `c̃_t` covers them in the subspace.
//!
//! The baselines are single-space LinUCB variants that differ only in the
//! feature map and the shrinkage target:
//!
//! | variant           | features     | shrink toward |
//! |-------------------|--------------|---------------|
//! | `NaiveLinUCB`     | `x`          | `0`           |
//! | `MeanRegularized` | `x`          | `w̄`           |
//! | `Reshape`         | `U_Dᵀx`      | `0`           |
//! | `SubspaceUCB`     | `Uᵀx`        | `0`           |

mod confidence;
mod estimators;
mod state;

use serde::{Deserialize, Serialize};

use crate::hierarchy::Hierarchy;
use crate::{Error, RealVector, Result};

pub use confidence::{confidence_coefficients, confidence_widths, ConfidenceCoefficients};
pub use estimators::{baseline_estimate, coarse_estimate, fine_estimate};
pub use state::{PolicyState, RidgeState, REFRESH_INTERVAL};

/// Exploration multiplier on `c_t` that defines CoFineUCB-focus.
pub const FOCUS_SCALE: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "cofine")]
    CoFine,
    #[serde(rename = "cofine_focus")]
    CoFineFocus,
    #[serde(rename = "naive")]
    NaiveLinUCB,
    #[serde(rename = "mean_regularized")]
    MeanRegularized,
    #[serde(rename = "reshape")]
    Reshape,
    #[serde(rename = "subspace")]
    SubspaceUCB,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::CoFine,
        Variant::CoFineFocus,
        Variant::NaiveLinUCB,
        Variant::MeanRegularized,
        Variant::Reshape,
        Variant::SubspaceUCB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::CoFine => "cofine",
            Variant::CoFineFocus => "cofine_focus",
            Variant::NaiveLinUCB => "naive",
            Variant::MeanRegularized => "mean_regularized",
            Variant::Reshape => "reshape",
            Variant::SubspaceUCB => "subspace",
        }
    }

    pub fn is_hierarchical(self) -> bool {
        matches!(self, Variant::CoFine | Variant::CoFineFocus)
    }

    pub fn uses_subspace(self) -> bool {
        matches!(self, Variant::CoFine | Variant::CoFineFocus | Variant::SubspaceUCB)
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| Error::InvalidConfig(format!("unknown policy `{s}`")))
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyConfig {
    pub variant: Variant,
    /// Full-space ridge `λ`; the confidence bounds assume `λ ≥ max ‖x‖²`.
    pub lambda: f64,
    /// Coarse ridge `λ̃`; assumes `λ̃ ≥ max ‖Uᵀx‖²`.
    pub lambda_tilde: f64,
    /// Confidence failure probability `δ`.
    pub delta: f64,
    /// Multiplier `η` on the full-space width `c_t` (CoFine variants only).
    pub explore_scale: f64,
    /// Assumed bound `S̃` on `‖w̃*‖`.
    pub s_tilde_bound: f64,
    /// Assumed bound `S⊥` on `‖w⊥*‖`.
    pub s_perp_bound: f64,
    /// Assumed bound on `‖w* − prior‖` for the single-space LinUCB baselines.
    pub s_bound: f64,
    /// Mean profile `w̄` for [`Variant::MeanRegularized`].
    pub w_bar: Option<RealVector>,
    /// Use `+D ln λ` inside the variance coefficients and `λλ̃S̃` as the coarse
    /// bias coefficient, in place of `−D ln λ` and `λ√λ̃S̃`.
    pub literal_constants: bool,
}

impl PolicyConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            lambda: 1.0,
            lambda_tilde: 1.0,
            delta: 0.1,
            explore_scale: if variant == Variant::CoFineFocus { FOCUS_SCALE } else { 1.0 },
            s_tilde_bound: 1.0,
            s_perp_bound: 0.1,
            s_bound: 1.0,
            w_bar: None,
            literal_constants: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and > 0");
        }
        if !(self.lambda_tilde > 0.0 && self.lambda_tilde.is_finite()) {
            return bad("lambda_tilde must be finite and > 0");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.explore_scale) {
            return bad("explore_scale must lie in [0, 1]");
        }
        if !(self.s_tilde_bound > 0.0 && self.s_tilde_bound.is_finite()) {
            return bad("s_tilde must be finite and > 0");
        }
        if !(self.s_perp_bound >= 0.0 && self.s_perp_bound.is_finite()) {
            return bad("s_perp must be finite and ≥ 0");
        }
        if !(self.s_bound >= 0.0 && self.s_bound.is_finite()) {
            return bad("s_bound must be finite and ≥ 0");
        }
        if self.variant == Variant::MeanRegularized && self.w_bar.is_none() {
            return Err(Error::MissingMeanProfile);
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        self.variant.name()
    }
}

/// Maps a raw context into the coordinates the variant's estimate lives in.
pub fn feature_map(x: &RealVector, h: &Hierarchy, variant: Variant) -> Result<RealVector> {
    Ok(match variant {
        Variant::CoFine | Variant::CoFineFocus => h.to_policy_coords(x),
        Variant::SubspaceUCB => h.project(&h.to_policy_coords(x)),
        Variant::Reshape => h.u_d.as_ref().ok_or(Error::MissingReshape)?.tr_mul(x),
        Variant::NaiveLinUCB | Variant::MeanRegularized => x.clone(),
    })
}

/// Fresh state for `variant` over a hierarchy of ambient dimension `D`.
pub fn initial_state(cfg: &PolicyConfig, h: &Hierarchy) -> Result<PolicyState> {
    cfg.validate()?;
    let d = h.dim();
    let k = h.k();
    let (full, coarse) = match cfg.variant {
        Variant::CoFine | Variant::CoFineFocus => (RidgeState::new(d, cfg.lambda)?, Some(RidgeState::new(k, cfg.lambda_tilde)?)),
        Variant::SubspaceUCB => (RidgeState::new(k, cfg.lambda_tilde)?, None),
        Variant::Reshape => {
            h.u_d.as_ref().ok_or(Error::MissingReshape)?;
            (RidgeState::new(d, cfg.lambda)?, None)
        }
        Variant::NaiveLinUCB | Variant::MeanRegularized => {
            if let Some(w_bar) = &cfg.w_bar {
                if w_bar.len() != d {
                    return Err(Error::dims(format!("w̄ has {} entries, D = {d}", w_bar.len())));
                }
            }
            (RidgeState::new(d, cfg.lambda)?, None)
        }
    };
    let w_hat_tilde = RealVector::zeros(coarse.as_ref().map_or(0, RidgeState::dim));
    let mut state = PolicyState { t: 0, w_hat: RealVector::zeros(full.dim()), full, coarse, w_hat_tilde };
    reestimate(&mut state, h, cfg)?;
    Ok(state)
}

fn reestimate(state: &mut PolicyState, h: &Hierarchy, cfg: &PolicyConfig) -> Result<()> {
    if cfg.variant.is_hierarchical() {
        // Coarse first: the fine estimate is shrunk toward U·w̃_t.
        state.w_hat_tilde = coarse_estimate(state, h, cfg)?;
        state.w_hat = fine_estimate(state, &state.w_hat_tilde, h, cfg)?;
    } else {
        state.w_hat = baseline_estimate(state, cfg, h)?;
    }
    Ok(())
}

/// Per-action decomposition of the upper confidence bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UcbTerms {
    /// `μ_t(x) = w_tᵀx` in the policy's own coordinates.
    pub mean: f64,
    /// `c_t(x)`, full-space width (already scaled by `η`).
    pub width: f64,
    /// `c̃_t(x)`, subspace width.
    pub width_tilde: f64,
}

impl UcbTerms {
    pub fn ucb(&self) -> f64 {
        self.mean + self.width + self.width_tilde
    }

    pub fn radius(&self) -> f64 {
        self.width + self.width_tilde
    }
}

/// UCB terms for a raw context.
pub fn ucb_terms(state: &PolicyState, x: &RealVector, h: &Hierarchy, cfg: &PolicyConfig) -> Result<UcbTerms> {
    let z = feature_map(x, h, cfg.variant)?;
    let (width, width_tilde) = confidence::widths_in_policy_coords(state, &z, h, cfg)?;
    Ok(UcbTerms { mean: state.w_hat.dot(&z), width, width_tilde })
}

/// Index of the context with the highest upper confidence bound; ties go to the lowest index.
pub fn select(state: &PolicyState, contexts: &[RealVector], h: &Hierarchy, cfg: &PolicyConfig) -> Result<usize> {
    if contexts.is_empty() {
        return Err(Error::EmptyContext);
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in contexts.iter().enumerate() {
        let score = ucb_terms(state, x, h, cfg)?.ucb();
        if score > best.1 {
            best = (i, score);
        }
    }
    Ok(best.0)
}

/// Records `(x, y)` and re-estimates (coarse, then fine).
pub fn update(state: &mut PolicyState, x: &RealVector, y: f64, h: &Hierarchy, cfg: &PolicyConfig) -> Result<()> {
    let z = feature_map(x, h, cfg.variant)?;
    state.full.observe(&z, y)?;
    if let Some(coarse) = state.coarse.as_mut() {
        coarse.observe(&h.project(&z), y)?;
    }
    state.t += 1;
    reestimate(state, h, cfg)
}

/// A policy bundled with its hierarchy and state.
#[derive(Clone, Debug)]
pub struct Policy {
    cfg: PolicyConfig,
    hierarchy: Hierarchy,
    state: PolicyState,
}

impl Policy {
    pub fn new(cfg: PolicyConfig, hierarchy: Hierarchy) -> Result<Self> {
        let state = initial_state(&cfg, &hierarchy)?;
        Ok(Self { cfg, hierarchy, state })
    }

    /// A hierarchy-free LinUCB baseline over `R^dim`.
    pub fn flat(cfg: PolicyConfig, dim: usize) -> Result<Self> {
        if cfg.variant.uses_subspace() || cfg.variant == Variant::Reshape {
            return Err(Error::InvalidConfig(format!("{} needs a hierarchy", cfg.variant)));
        }
        Self::new(cfg, Hierarchy::coordinate(dim, 1)?)
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.cfg
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn select(&self, contexts: &[RealVector]) -> Result<usize> {
        select(&self.state, contexts, &self.hierarchy, &self.cfg)
    }

    pub fn update(&mut self, x: &RealVector, y: f64) -> Result<()> {
        update(&mut self.state, x, y, &self.hierarchy, &self.cfg)
    }

    pub fn ucb_terms(&self, x: &RealVector) -> Result<UcbTerms> {
        ucb_terms(&self.state, x, &self.hierarchy, &self.cfg)
    }

    pub fn coefficients(&self) -> ConfidenceCoefficients {
        confidence_coefficients(&self.state, &self.cfg)
    }

    /// Current estimate expressed as a vector `v` with `μ_t(x) = vᵀx` for raw contexts.
    pub fn effective_weights(&self) -> Result<RealVector> {
        let h = &self.hierarchy;
        Ok(match self.cfg.variant {
            Variant::CoFine | Variant::CoFineFocus => match (&h.u_d, h.composed) {
                (Some(u_d), true) => u_d * &self.state.w_hat,
                _ => self.state.w_hat.clone(),
            },
            Variant::SubspaceUCB => {
                let lifted = &h.u * &self.state.w_hat;
                match (&h.u_d, h.composed) {
                    (Some(u_d), true) => u_d * lifted,
                    _ => lifted,
                }
            }
            Variant::Reshape => h.u_d.as_ref().ok_or(Error::MissingReshape)? * &self.state.w_hat,
            Variant::NaiveLinUCB | Variant::MeanRegularized => self.state.w_hat.clone(),
        })
    }
}
