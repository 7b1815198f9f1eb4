//! Coarse-to-fine hierarchical exploration for linear contextual bandits.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense SPD solves, PSD square roots, truncated SVD and Gram updates.
//! - [`hierarchy`]: learning a coarse subspace `U` (and an optional full-rank reshaping
//!   `U_D`) from existing user profiles, and decomposing a preference vector against it.
//! - [`policies`]: CoFineUCB and the single-space baselines behind one select/update contract.
//! - [`environments`]: seeded simulated users, contexts and rewards.
//! - [`harness`]: trials, paired multi-policy experiments, leave-one-out and sweep protocols,
//!   the regret-bound overlay.
//! - [`config`], [`io`], [`plot`], [`cli`]: the `cofine` command-line front end.
//!
//! Every runnable capability has a matching program under `examples/`.

pub mod cli;
pub mod config;
pub mod environments;
pub mod harness;
pub mod hierarchy;
pub mod io;
pub mod numerics;
pub mod plot;
pub mod policies;

mod error;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};

/// Dense row/column matrix of `f64`; every estimate in the crate lives in one.
pub type RealMatrix = DMatrix<f64>;
/// Dense `f64` vector.
pub type RealVector = DVector<f64>;

/// The names most programs need.
pub mod prelude {
    pub use crate::environments::{
        best_action_value, gen_profile_population, gen_synthetic_wstar, EnvironmentSpec, NoiseModel, Population, PopulationSpec,
    };
    pub use crate::harness::{
        cofine_regret_bound, held_out, leave_one_out, run_experiment, run_protocol, run_synthetic, run_trial, AggregateReport,
        ExperimentConfig, Protocol, RegretTrace, Scenario,
    };
    pub use crate::hierarchy::{decompose, learn_composed, learn_reshape, learn_u, Decomposition, Hierarchy, ProfileSet};
    pub use crate::policies::{Policy, PolicyConfig, Variant};
    pub use crate::{Error, RealMatrix, RealVector, Result};
}
