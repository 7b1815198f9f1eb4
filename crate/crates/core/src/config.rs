//! Flat TOML experiment configuration.
//!
//! Every key is optional and has a default; unknown keys are rejected.
//! [`RunManifest`] wraps a fully materialized config so that a run can be
//! repeated exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environments::{NoiseKind, NoiseModel, PopulationSpec};
use crate::harness::{EnvTemplate, ExperimentConfig, Protocol, Scenario};
use crate::io::read_profiles;
use crate::policies::{PolicyConfig, Variant, FOCUS_SCALE};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolName {
    Single,
    LeaveOneOut,
    SweepK,
    SweepBeta,
    SweepExplore,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    /// Fresh `w*` per trial with residual `beta` outside the first `k_true` coordinates.
    Synthetic,
    /// Profiles generated around a random `k_true`-dimensional subspace.
    Population,
    /// Profiles read from the CSV at `profiles`.
    Profiles,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub protocol: ProtocolName,
    pub scenario: ScenarioName,
    /// Base seed; trial `i` of user `u` uses `seed + u·trials + i`.
    pub seed: u64,
    pub trials: usize,
    /// `T`, rounds per trial.
    pub horizon: usize,
    pub policies: Vec<Variant>,

    /// `λ`, full-space ridge.
    pub lambda: f64,
    /// `λ̃`, coarse ridge.
    pub lambda_tilde: f64,
    /// `δ`, confidence failure probability.
    pub delta: f64,
    /// `η` for `cofine`.
    pub explore_scale: f64,
    /// `η` for `cofine_focus`.
    pub focus_scale: f64,
    /// Assumed `S̃`.
    pub s_tilde: f64,
    /// Assumed `S⊥`.
    pub s_perp: f64,
    /// Assumed `‖w* − prior‖` for the single-space baselines.
    pub s_bound: f64,
    pub literal_constants: bool,
    /// Use each user's true norms instead of the assumed ones.
    pub oracle_bounds: bool,

    /// `D`.
    pub dim: usize,
    /// `K`, the subspace dimension handed to the policies.
    pub k: usize,
    /// Dimension of the subspace users are generated around.
    pub k_true: usize,
    /// `β`, residual magnitude of synthetic users.
    pub beta: f64,
    pub betas: Vec<f64>,
    pub ks: Vec<usize>,
    pub explore_scales: Vec<f64>,

    pub n_actions: usize,
    pub noise: NoiseKind,
    /// `σ` of Gaussian reward noise.
    pub sigma: f64,
    pub scale_magnitudes: bool,

    /// `N`, generated population size.
    pub population_n: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub population_seed: u64,
    /// When positive, evaluate this many new users (residual `held_out_beta`)
    /// against a hierarchy trained on the whole population.
    pub held_out_users: usize,
    pub held_out_beta: f64,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub profiles: Option<PathBuf>,
    /// Augment profiles with `I_D` before learning `U`.
    pub ridge: bool,
    /// Learn `U` on reshaped profiles and run the CoFine policies in reshaped coordinates.
    pub compose_reshape: bool,

    pub write_traces: bool,
    pub plot_bound: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolName::Single,
            scenario: ScenarioName::Synthetic,
            seed: 0,
            trials: 20,
            horizon: 1000,
            policies: vec![Variant::CoFine, Variant::CoFineFocus, Variant::NaiveLinUCB, Variant::SubspaceUCB],
            lambda: 1.0,
            lambda_tilde: 1.0,
            delta: 0.1,
            explore_scale: 1.0,
            focus_scale: FOCUS_SCALE,
            s_tilde: 1.0,
            s_perp: 0.1,
            s_bound: 1.0,
            literal_constants: false,
            oracle_bounds: false,
            dim: 25,
            k: 5,
            k_true: 5,
            beta: 0.0,
            betas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            ks: vec![2, 5, 10, 25],
            explore_scales: vec![0.1, 0.25, 0.5, 1.0],
            n_actions: 20,
            noise: NoiseKind::Gaussian,
            sigma: 0.1,
            scale_magnitudes: false,
            population_n: 40,
            beta_min: 0.0,
            beta_max: 0.3,
            population_seed: 1,
            held_out_users: 0,
            held_out_beta: 0.9,
            profiles: None,
            ridge: false,
            compose_reshape: false,
            write_traces: true,
            plot_bound: true,
        }
    }
}

/// Seed offset separating held-out users from population profiles.
const HELD_OUT_SEED_OFFSET: u64 = 1 << 32;

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn policy_configs(&self) -> Vec<PolicyConfig> {
        self.policies
            .iter()
            .map(|&v| PolicyConfig {
                lambda: self.lambda,
                lambda_tilde: self.lambda_tilde,
                delta: self.delta,
                explore_scale: if v == Variant::CoFineFocus { self.focus_scale } else { self.explore_scale },
                s_tilde_bound: self.s_tilde,
                s_perp_bound: self.s_perp,
                s_bound: self.s_bound,
                literal_constants: self.literal_constants,
                ..PolicyConfig::new(v)
            })
            .collect()
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let protocol = match self.protocol {
            ProtocolName::Single => Protocol::Single,
            ProtocolName::LeaveOneOut => Protocol::LeaveOneOut,
            ProtocolName::SweepK => Protocol::SweepK(self.ks.clone()),
            ProtocolName::SweepBeta => Protocol::SweepBeta(self.betas.clone()),
            ProtocolName::SweepExplore => Protocol::SweepExplore(self.explore_scales.clone()),
        };
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig("sigma must be finite and ≥ 0".into()));
        }
        let cfg = ExperimentConfig {
            horizon: self.horizon,
            n_trials: self.trials,
            base_seed: self.seed,
            policies: self.policy_configs(),
            env: EnvTemplate {
                noise: NoiseModel { kind: self.noise, sigma: self.sigma },
                n_actions: self.n_actions,
                scale_magnitudes: self.scale_magnitudes,
            },
            oracle_bounds: self.oracle_bounds,
            keep_traces: true,
            protocol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the user/hierarchy source. Reads the profile CSV for the
    /// `profiles` scenario.
    pub fn scenario(&self) -> Result<Scenario> {
        let check_k = |k: usize, dim: usize| {
            if k == 0 || k > dim {
                Err(Error::InvalidConfig(format!("need 1 ≤ k ≤ D, got k = {k}, D = {dim}")))
            } else {
                Ok(())
            }
        };
        match self.scenario {
            ScenarioName::Synthetic => {
                check_k(self.k, self.dim)?;
                check_k(self.k_true, self.dim)?;
                if !(0.0..=1.0).contains(&self.beta) {
                    return Err(Error::InvalidConfig("beta must lie in [0, 1]".into()));
                }
                Ok(Scenario::Synthetic { dim: self.dim, k_true: self.k_true, k: self.k, beta: self.beta })
            }
            ScenarioName::Population => {
                check_k(self.k, self.dim)?;
                let spec = PopulationSpec {
                    beta_min: self.beta_min,
                    beta_max: self.beta_max,
                    ..PopulationSpec::new(self.dim, self.k_true, self.population_n)
                };
                let population = spec.generate(self.population_seed)?;
                let held_out = if self.held_out_users > 0 {
                    Some(
                        (0..self.held_out_users as u64)
                            .map(|i| {
                                population
                                    .sample_user(self.held_out_beta, self.population_seed.wrapping_add(HELD_OUT_SEED_OFFSET + i))
                            })
                            .collect::<Result<Vec<_>>>()?,
                    )
                } else {
                    None
                };
                Ok(Scenario::Profiles {
                    profiles: population.profiles().clone(),
                    k: self.k,
                    ridge: self.ridge,
                    compose_reshape: self.compose_reshape,
                    held_out,
                })
            }
            ScenarioName::Profiles => {
                let path = self
                    .profiles
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("scenario `profiles` needs `profiles = \"path.csv\"`".into()))?;
                let profiles = read_profiles(path)?;
                check_k(self.k, profiles.dim())?;
                if self.held_out_users > 0 {
                    return Err(Error::InvalidConfig("held_out_users needs the population scenario".into()));
                }
                Ok(Scenario::Profiles {
                    profiles,
                    k: self.k,
                    ridge: self.ridge,
                    compose_reshape: self.compose_reshape,
                    held_out: None,
                })
            }
        }
    }

    /// Makes a relative `profiles` path absolute against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(p) = &self.profiles {
            if p.is_relative() {
                self.profiles = Some(base.join(p));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub base_seed: u64,
    pub artifacts: Vec<String>,
    pub config: SimConfig,
}

impl RunManifest {
    pub fn new(config: SimConfig, artifacts: Vec<String>) -> Self {
        Self { tool_version: env!("CARGO_PKG_VERSION").to_string(), base_seed: config.seed, artifacts, config }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

/// Parses either a plain config or a manifest (recognized by its `[config]` table).
pub fn load_config_text(text: &str) -> Result<SimConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
    if table.get("config").is_some_and(toml::Value::is_table) {
        let manifest: RunManifest = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        Ok(manifest.config)
    } else {
        SimConfig::from_toml(text)
    }
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let mut cfg = load_config_text(&text)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(SimConfig::from_toml("").unwrap(), SimConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = SimConfig::from_toml("lamda = 2.0\n").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(ref m) if m.contains("lamda")), "{err}");
        assert!(SimConfig::from_toml("policies = [\"greedy\"]\n").is_err());
        assert!(SimConfig::from_toml("horizon = -3\n").is_err());
    }

    #[test]
    fn keys_map_onto_policies() {
        let cfg = SimConfig::from_toml("lambda = 4.0\nfocus_scale = 0.1\npolicies = [\"cofine_focus\", \"naive\"]\n").unwrap();
        let ps = cfg.policy_configs();
        assert_eq!(ps[0].variant, Variant::CoFineFocus);
        assert_eq!(ps[0].explore_scale, 0.1);
        assert_eq!(ps[1].explore_scale, 1.0);
        assert!(ps.iter().all(|p| p.lambda == 4.0));
    }

    #[test]
    fn manifest_round_trip() {
        let cfg = SimConfig {
            protocol: ProtocolName::SweepBeta,
            seed: 42,
            profiles: Some("/tmp/w.csv".into()),
            ..SimConfig::default()
        };
        let m = RunManifest::new(cfg.clone(), vec!["aggregate.csv".into()]);
        let text = m.to_toml();
        assert_eq!(load_config_text(&text).unwrap(), cfg);
        assert_eq!(load_config_text(&cfg.to_toml()).unwrap(), cfg);
        assert!(load_config_text(&text.replace("tool_version", "tool_versio")).is_err());
    }

    #[test]
    fn scenario_validation() {
        let bad_k = SimConfig { k: 30, ..SimConfig::default() };
        assert!(matches!(bad_k.scenario(), Err(Error::InvalidConfig(_))));
        let no_path = SimConfig { scenario: ScenarioName::Profiles, ..SimConfig::default() };
        assert!(no_path.scenario().is_err());
        let pop = SimConfig { scenario: ScenarioName::Population, held_out_users: 3, ..SimConfig::default() };
        match pop.scenario().unwrap() {
            Scenario::Profiles { profiles, held_out: Some(users), .. } => {
                assert_eq!((profiles.dim(), profiles.len(), users.len()), (25, 40, 3));
            }
            other => panic!("{other:?}"),
        }
    }
}
