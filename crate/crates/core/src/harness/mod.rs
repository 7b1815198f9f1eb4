//! Seeded regret experiments.
//!
//! A trial drives one policy against one simulated user for `T` rounds and
//! records the expected-reward regret `w*ᵀx_t* − w*ᵀx_t` of every choice,
//! together with whether the policy's confidence interval covered the true
//! mean of the action it played. Experiments run every configured policy on
//! identical environment seeds (paired trials) and average the traces.

mod bound;

use rayon::prelude::*;

use crate::environments::{best_action_value, gen_contexts, gen_synthetic_wstar, sample_reward, EnvironmentSpec, NoiseModel};
use crate::hierarchy::{decompose, learn_composed, learn_reshape, learn_u, Decomposition, Hierarchy, ProfileSet};
use crate::policies::{Policy, PolicyConfig, Variant};
use crate::{Error, RealVector, Result};

pub use bound::{beta_coarse, beta_full, cofine_regret_bound, linucb_bound};

/// Coverage slack over `δ` tolerated by [`coverage_check`].
pub const COVERAGE_SLACK: f64 = 0.02;

/// Anything that can play the bandit game.
pub trait Agent {
    fn select(&mut self, contexts: &[RealVector]) -> Result<usize>;
    fn observe(&mut self, x: &RealVector, reward: f64) -> Result<()>;
    /// Whether `|μ(x) − truth|` lies within the agent's confidence radius at `x`.
    /// `None` for agents without confidence sets.
    fn covers(&self, _x: &RealVector, _truth: f64) -> Result<Option<bool>> {
        Ok(None)
    }
}

impl Agent for Policy {
    fn select(&mut self, contexts: &[RealVector]) -> Result<usize> {
        Policy::select(self, contexts)
    }

    fn observe(&mut self, x: &RealVector, reward: f64) -> Result<()> {
        self.update(x, reward)
    }

    fn covers(&self, x: &RealVector, truth: f64) -> Result<Option<bool>> {
        let terms = self.ucb_terms(x)?;
        Ok(Some((terms.mean - truth).abs() <= terms.radius()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretTrace {
    pub policy: String,
    pub trial: usize,
    pub user: usize,
    pub inst: Vec<f64>,
    pub cum: Vec<f64>,
    pub covered: Vec<bool>,
    pub coverage_violations: usize,
    /// True `‖w̃*‖` and `‖w⊥*‖` for the user under the policy's hierarchy, when it has one.
    pub oracle: Option<(f64, f64)>,
}

impl RegretTrace {
    pub fn horizon(&self) -> usize {
        self.inst.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    pub fn violation_rate(&self) -> f64 {
        if self.inst.is_empty() {
            0.0
        } else {
            self.coverage_violations as f64 / self.inst.len() as f64
        }
    }

    /// Mean instantaneous regret over rounds `[from, to)`.
    pub fn mean_regret(&self, from: usize, to: usize) -> f64 {
        let span = &self.inst[from..to];
        span.iter().sum::<f64>() / span.len().max(1) as f64
    }
}

/// Plays `agent` against `env` for `horizon` rounds.
pub fn run_trial_with(env: &EnvironmentSpec, agent: &mut dyn Agent, horizon: usize, label: &str) -> Result<RegretTrace> {
    let mut trace = RegretTrace {
        policy: label.to_string(),
        trial: 0,
        user: 0,
        inst: Vec::with_capacity(horizon),
        cum: Vec::with_capacity(horizon),
        covered: Vec::with_capacity(horizon),
        coverage_violations: 0,
        oracle: None,
    };
    let mut total = 0.0;
    for t in 0..horizon as u64 {
        let contexts = gen_contexts(env, t);
        let (_, best) = best_action_value(env, &contexts)?;
        let choice = agent.select(&contexts)?;
        let x = &contexts[choice];
        let truth = env.expected_reward(x);
        let covered = agent.covers(x, truth)?.unwrap_or(true);
        let regret = (best - truth).max(0.0);
        total += regret;
        trace.inst.push(regret);
        trace.cum.push(total);
        trace.covered.push(covered);
        if !covered {
            trace.coverage_violations += 1;
        }
        agent.observe(x, sample_reward(env, x, t))?;
    }
    Ok(trace)
}

/// One policy, one user, one seed.
pub fn run_trial(env: &EnvironmentSpec, policy: &PolicyConfig, h: &Hierarchy, horizon: usize, seed: u64) -> Result<RegretTrace> {
    if h.dim() != env.dim() {
        return Err(Error::dims(format!("hierarchy D = {}, environment D = {}", h.dim(), env.dim())));
    }
    let env = EnvironmentSpec { seed, ..env.clone() };
    let mut agent = Policy::new(policy.clone(), h.clone())?;
    let mut trace = run_trial_with(&env, &mut agent, horizon, policy.name())?;
    if policy.variant.uses_subspace() {
        let d = decompose(&policy_coords_wstar(&env.w_star, h)?, h)?;
        trace.oracle = Some((d.s_tilde, d.s_perp));
    }
    Ok(trace)
}

/// `true` iff the trace's violation rate is at most `δ + 0.02`.
pub fn coverage_check(trace: &RegretTrace, delta: f64) -> bool {
    trace.violation_rate() <= delta + COVERAGE_SLACK
}

/// `w*` expressed in the coordinates `U` acts on: `U_D⁻¹w*` for a composed hierarchy.
pub fn policy_coords_wstar(w_star: &RealVector, h: &Hierarchy) -> Result<RealVector> {
    match (&h.u_d, h.composed) {
        (Some(u_d), true) => u_d.clone().lu().solve(w_star).ok_or(Error::SingularProjection),
        _ => Ok(w_star.clone()),
    }
}

/// Candidate-set and noise settings shared by every user in an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvTemplate {
    pub noise: NoiseModel,
    pub n_actions: usize,
    pub scale_magnitudes: bool,
}

impl Default for EnvTemplate {
    fn default() -> Self {
        Self { noise: NoiseModel::default(), n_actions: 20, scale_magnitudes: false }
    }
}

impl EnvTemplate {
    pub fn build(&self, w_star: RealVector, seed: u64) -> EnvironmentSpec {
        EnvironmentSpec {
            noise: self.noise,
            n_actions: self.n_actions,
            scale_magnitudes: self.scale_magnitudes,
            ..EnvironmentSpec::new(w_star, seed)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Protocol {
    Single,
    LeaveOneOut,
    SweepK(Vec<usize>),
    SweepBeta(Vec<f64>),
    SweepExplore(Vec<f64>),
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Single => "single",
            Protocol::LeaveOneOut => "leave_one_out",
            Protocol::SweepK(_) => "sweep_k",
            Protocol::SweepBeta(_) => "sweep_beta",
            Protocol::SweepExplore(_) => "sweep_explore",
        }
    }
}

/// Where users and hierarchies come from.
#[derive(Clone, Debug)]
pub enum Scenario {
    /// Each trial draws a fresh unit-norm `w*` with residual `β` outside the
    /// first `k_true` coordinates; policies use the first-`k` coordinate hierarchy.
    Synthetic { dim: usize, k_true: usize, k: usize, beta: f64 },
    /// One known user and hierarchy.
    Fixed { w_star: RealVector, hierarchy: Hierarchy },
    /// Hierarchies learned from profiles. Users are the profiles themselves
    /// (leave-one-out) or, when `held_out` is set, those extra users with the
    /// hierarchy trained on every profile.
    Profiles { profiles: ProfileSet, k: usize, ridge: bool, compose_reshape: bool, held_out: Option<Vec<RealVector>> },
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub horizon: usize,
    pub n_trials: usize,
    pub base_seed: u64,
    pub policies: Vec<PolicyConfig>,
    pub env: EnvTemplate,
    /// Replace each policy's assumed norm bounds with the user's true ones.
    pub oracle_bounds: bool,
    pub keep_traces: bool,
    pub protocol: Protocol,
}

impl ExperimentConfig {
    pub fn new(policies: Vec<PolicyConfig>) -> Self {
        Self {
            horizon: 1000,
            n_trials: 10,
            base_seed: 0,
            policies,
            env: EnvTemplate::default(),
            oracle_bounds: false,
            keep_traces: true,
            protocol: Protocol::Single,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.n_trials == 0 {
            return Err(Error::InvalidConfig("horizon and trials must be ≥ 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("no policies configured".into()));
        }
        if self.env.n_actions == 0 {
            return Err(Error::InvalidConfig("n_actions must be ≥ 1".into()));
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].iter().any(|q| q.variant == p.variant) {
                return Err(Error::InvalidConfig(format!("policy {} listed twice", p.variant)));
            }
            if p.variant != Variant::MeanRegularized {
                p.validate()?;
            }
        }
        let empty = match &self.protocol {
            Protocol::SweepK(v) => v.is_empty(),
            Protocol::SweepBeta(v) => v.is_empty(),
            Protocol::SweepExplore(v) => v.is_empty(),
            _ => false,
        };
        if empty {
            return Err(Error::InvalidConfig("sweep values must be non-empty".into()));
        }
        Ok(())
    }
}

/// One simulated user with the hierarchy every policy uses for it.
#[derive(Clone, Debug)]
pub struct Task {
    pub user: usize,
    pub w_star: RealVector,
    pub hierarchy: Hierarchy,
    pub w_bar: Option<RealVector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSummary {
    pub label: String,
    pub n: usize,
    pub mean_cum: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl SeriesSummary {
    pub fn final_mean(&self) -> f64 {
        self.mean_cum.last().copied().unwrap_or(0.0)
    }

    pub fn final_stderr(&self) -> f64 {
        self.stderr.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateReport {
    pub horizon: usize,
    pub series: Vec<SeriesSummary>,
    /// Mean regret-bound curve over users for the first CoFine-family policy
    /// (oracle `S̃`, `S⊥`), indexed by round `0..=T`.
    pub bound: Option<Vec<f64>>,
    pub traces: Vec<RegretTrace>,
}

impl AggregateReport {
    pub fn series(&self, label: &str) -> Option<&SeriesSummary> {
        self.series.iter().find(|s| s.label == label)
    }

    pub fn final_mean(&self, variant: Variant) -> Option<f64> {
        self.series(variant.name()).map(SeriesSummary::final_mean)
    }

    pub fn traces_for<'a>(&'a self, variant: Variant) -> impl Iterator<Item = &'a RegretTrace> + 'a {
        self.traces.iter().filter(move |t| t.policy == variant.name())
    }
}

struct Accumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    n: usize,
}

impl Accumulator {
    fn new(horizon: usize) -> Self {
        Self { sum: vec![0.0; horizon], sum_sq: vec![0.0; horizon], n: 0 }
    }

    fn push(&mut self, cum: &[f64]) {
        for (t, &c) in cum.iter().enumerate() {
            self.sum[t] += c;
            self.sum_sq[t] += c * c;
        }
        self.n += 1;
    }

    fn finish(self, label: String) -> SeriesSummary {
        let n = self.n as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let stderr = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(sq, m)| {
                if self.n < 2 {
                    0.0
                } else {
                    let var = ((sq - n * m * m) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                }
            })
            .collect();
        SeriesSummary { label, n: self.n, mean_cum: mean, stderr }
    }
}

fn configure_for_task(policy: &PolicyConfig, task: &Task, oracle: bool) -> Result<PolicyConfig> {
    let mut cfg = policy.clone();
    if cfg.variant == Variant::MeanRegularized && cfg.w_bar.is_none() {
        cfg.w_bar = Some(task.w_bar.clone().ok_or(Error::MissingMeanProfile)?);
    }
    if oracle {
        let h = &task.hierarchy;
        match cfg.variant {
            Variant::CoFine | Variant::CoFineFocus | Variant::SubspaceUCB => {
                let d = decompose(&policy_coords_wstar(&task.w_star, h)?, h)?;
                cfg.s_tilde_bound = d.s_tilde.max(1e-12);
                cfg.s_perp_bound = d.s_perp;
            }
            Variant::NaiveLinUCB => cfg.s_bound = task.w_star.norm(),
            Variant::MeanRegularized => cfg.s_bound = (&task.w_star - cfg.w_bar.as_ref().unwrap()).norm(),
            Variant::Reshape => {
                let u_d = h.u_d.as_ref().ok_or(Error::MissingReshape)?;
                cfg.s_bound = u_d.clone().lu().solve(&task.w_star).ok_or(Error::SingularProjection)?.norm();
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs every policy on every `(task, trial)` pair with paired seeds.
///
/// Trial `i` of task `u` uses environment seed `base_seed + u·trials_per_task + i`.
/// Work runs in parallel; results are merged in task/trial order.
pub fn run_tasks(cfg: &ExperimentConfig, tasks: &[Task], trials_per_task: usize) -> Result<AggregateReport> {
    cfg.validate()?;
    let horizon = cfg.horizon;
    let units: Vec<(usize, usize)> = (0..tasks.len()).flat_map(|u| (0..trials_per_task).map(move |i| (u, i))).collect();

    let mut accs: Vec<Accumulator> = cfg.policies.iter().map(|_| Accumulator::new(horizon)).collect();
    let mut traces = Vec::new();
    const CHUNK: usize = 64;
    for chunk in units.chunks(CHUNK) {
        let results: Vec<Result<Vec<RegretTrace>>> = chunk
            .par_iter()
            .map(|&(u, i)| {
                let task = &tasks[u];
                let trial = u * trials_per_task + i;
                let seed = cfg.base_seed.wrapping_add(trial as u64);
                let env = cfg.env.build(task.w_star.clone(), seed);
                cfg.policies
                    .iter()
                    .map(|p| {
                        let pc = configure_for_task(p, task, cfg.oracle_bounds)?;
                        let mut tr = run_trial(&env, &pc, &task.hierarchy, horizon, seed)?;
                        tr.trial = trial;
                        tr.user = task.user;
                        Ok(tr)
                    })
                    .collect()
            })
            .collect();
        for per_policy in results {
            for (acc, tr) in accs.iter_mut().zip(per_policy?) {
                acc.push(&tr.cum);
                if cfg.keep_traces {
                    traces.push(tr);
                }
            }
        }
    }

    let series = accs.into_iter().zip(&cfg.policies).map(|(a, p)| a.finish(p.name().to_string())).collect();
    Ok(AggregateReport { horizon, series, bound: mean_bound(cfg, tasks)?, traces })
}

/// Aggregates traces per policy label, in order of first appearance.
pub fn aggregate_traces(traces: &[RegretTrace]) -> Result<AggregateReport> {
    let horizon = traces.first().map_or(0, RegretTrace::horizon);
    if traces.iter().any(|t| t.horizon() != horizon) {
        return Err(Error::InvalidConfig("traces have different horizons".into()));
    }
    let mut labels: Vec<&str> = Vec::new();
    for t in traces {
        if !labels.contains(&t.policy.as_str()) {
            labels.push(&t.policy);
        }
    }
    let series = labels
        .iter()
        .map(|&label| {
            let mut acc = Accumulator::new(horizon);
            traces.iter().filter(|t| t.policy == label).for_each(|t| acc.push(&t.cum));
            acc.finish(label.to_string())
        })
        .collect();
    Ok(AggregateReport { horizon, series, bound: None, traces: traces.to_vec() })
}

fn mean_bound(cfg: &ExperimentConfig, tasks: &[Task]) -> Result<Option<Vec<f64>>> {
    let Some(policy) = cfg.policies.iter().find(|p| p.variant.is_hierarchical()) else {
        return Ok(None);
    };
    let mut total = vec![0.0; cfg.horizon + 1];
    for task in tasks {
        let h = &task.hierarchy;
        let d: Decomposition = decompose(&policy_coords_wstar(&task.w_star, h)?, h)?;
        for (acc, b) in total.iter_mut().zip(cofine_regret_bound(policy, &d, h.dim(), h.k(), cfg.horizon)) {
            *acc += b;
        }
    }
    let n = tasks.len().max(1) as f64;
    Ok(Some(total.into_iter().map(|b| b / n).collect()))
}

/// `n_trials` paired trials of every policy against one fixed user.
pub fn run_experiment(cfg: &ExperimentConfig, env: &EnvironmentSpec, h: &Hierarchy) -> Result<AggregateReport> {
    let task = Task { user: 0, w_star: env.w_star.clone(), hierarchy: h.clone(), w_bar: None };
    let cfg = ExperimentConfig {
        env: EnvTemplate { noise: env.noise, n_actions: env.n_actions, scale_magnitudes: env.scale_magnitudes },
        ..cfg.clone()
    };
    run_tasks(&cfg, &[task], cfg.n_trials)
}

/// Trains the hierarchy (and the reshaping, when asked) on `profiles`.
pub fn train_hierarchy(profiles: &ProfileSet, k: usize, ridge: bool, compose_reshape: bool) -> Result<Hierarchy> {
    if compose_reshape {
        learn_composed(profiles, k, ridge)
    } else {
        learn_u(profiles, k, ridge)?.with_reshape(learn_reshape(profiles)?)
    }
}

/// Leave-one-out tasks: user `i` is profile `i`, its hierarchy is trained on the rest.
pub fn leave_one_out_tasks(profiles: &ProfileSet, k: usize, ridge: bool, compose_reshape: bool) -> Result<Vec<Task>> {
    if profiles.len() < 2 {
        return Err(Error::InvalidProfiles("leave-one-out needs N ≥ 2".into()));
    }
    (0..profiles.len())
        .into_par_iter()
        .map(|i| {
            let rest = profiles.without(i).expect("N ≥ 2");
            Ok(Task {
                user: i,
                w_star: profiles.profile(i),
                hierarchy: train_hierarchy(&rest, k, ridge, compose_reshape)?,
                w_bar: Some(rest.mean()),
            })
        })
        .collect()
}

pub fn leave_one_out(
    profiles: &ProfileSet,
    k: usize,
    ridge: bool,
    compose_reshape: bool,
    cfg: &ExperimentConfig,
) -> Result<AggregateReport> {
    run_tasks(cfg, &leave_one_out_tasks(profiles, k, ridge, compose_reshape)?, cfg.n_trials)
}

/// Evaluates new users against a hierarchy trained on every profile.
pub fn held_out(
    profiles: &ProfileSet,
    users: &[RealVector],
    k: usize,
    ridge: bool,
    compose_reshape: bool,
    cfg: &ExperimentConfig,
) -> Result<AggregateReport> {
    let h = train_hierarchy(profiles, k, ridge, compose_reshape)?;
    let tasks: Vec<Task> = users
        .iter()
        .enumerate()
        .map(|(u, w)| Task { user: u, w_star: w.clone(), hierarchy: h.clone(), w_bar: Some(profiles.mean()) })
        .collect();
    run_tasks(cfg, &tasks, cfg.n_trials)
}

/// `n_trials` synthetic users, one trial each; user `i` is drawn with seed `base_seed + i`.
pub fn synthetic_tasks(cfg: &ExperimentConfig, dim: usize, k_true: usize, k: usize, beta: f64) -> Result<Vec<Task>> {
    let h = Hierarchy::coordinate(dim, k)?;
    (0..cfg.n_trials)
        .map(|i| {
            let (w, _) = gen_synthetic_wstar(dim, k_true, beta, cfg.base_seed.wrapping_add(i as u64))?;
            Ok(Task { user: i, w_star: w, hierarchy: h.clone(), w_bar: None })
        })
        .collect()
}

pub fn run_synthetic(cfg: &ExperimentConfig, dim: usize, k_true: usize, k: usize, beta: f64) -> Result<AggregateReport> {
    run_tasks(cfg, &synthetic_tasks(cfg, dim, k_true, k, beta)?, 1)
}

/// One point of a parameter sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub param: &'static str,
    pub value: f64,
    pub report: AggregateReport,
}

/// Runs `cfg.protocol` on `scenario`; non-sweep protocols yield one unlabeled point.
pub fn run_protocol(cfg: &ExperimentConfig, scenario: &Scenario) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let single = |cfg: &ExperimentConfig, scenario: &Scenario| -> Result<AggregateReport> {
        match scenario {
            Scenario::Synthetic { dim, k_true, k, beta } => run_synthetic(cfg, *dim, *k_true, *k, *beta),
            Scenario::Fixed { w_star, hierarchy } => {
                run_experiment(cfg, &cfg.env.build(w_star.clone(), cfg.base_seed), hierarchy)
            }
            Scenario::Profiles { profiles, k, ridge, compose_reshape, held_out: Some(users) } => {
                held_out(profiles, users, *k, *ridge, *compose_reshape, cfg)
            }
            Scenario::Profiles { profiles, k, ridge, compose_reshape, held_out: None } => {
                leave_one_out(profiles, *k, *ridge, *compose_reshape, cfg)
            }
        }
    };
    let point = |param, value, report| SweepPoint { param, value, report };

    match &cfg.protocol {
        Protocol::Single => Ok(vec![point("none", 0.0, single(cfg, scenario)?)]),
        Protocol::LeaveOneOut => match scenario {
            Scenario::Profiles { held_out: None, .. } => Ok(vec![point("none", 0.0, single(cfg, scenario)?)]),
            _ => Err(Error::InvalidConfig("leave_one_out needs a profile scenario without held-out users".into())),
        },
        Protocol::SweepBeta(betas) => {
            let Scenario::Synthetic { dim, k_true, k, .. } = scenario else {
                return Err(Error::InvalidConfig("sweep_beta needs the synthetic scenario".into()));
            };
            betas.iter().map(|&beta| Ok(point("beta", beta, run_synthetic(cfg, *dim, *k_true, *k, beta)?))).collect()
        }
        Protocol::SweepK(ks) => ks
            .iter()
            .map(|&k| {
                let scenario = match scenario.clone() {
                    Scenario::Synthetic { dim, k_true, beta, .. } => Scenario::Synthetic { dim, k_true, k, beta },
                    Scenario::Profiles { profiles, ridge, compose_reshape, held_out, .. } => {
                        Scenario::Profiles { profiles, k, ridge, compose_reshape, held_out }
                    }
                    Scenario::Fixed { .. } => return Err(Error::InvalidConfig("sweep_k cannot vary a fixed hierarchy".into())),
                };
                Ok(point("k", k as f64, single(cfg, &scenario)?))
            })
            .collect(),
        Protocol::SweepExplore(scales) => scales
            .iter()
            .map(|&eta| {
                let mut cfg = cfg.clone();
                for p in cfg.policies.iter_mut().filter(|p| p.variant.is_hierarchical()) {
                    p.explore_scale = eta;
                }
                Ok(point("explore_scale", eta, single(&cfg, scenario)?))
            })
            .collect(),
    }
}

/// Per-trial comparison of final regret between two policies in the same report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WinTieLoss {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

pub fn paired_record(traces: &[RegretTrace], a: &str, b: &str) -> WinTieLoss {
    let mut out = WinTieLoss::default();
    for ta in traces.iter().filter(|t| t.policy == a) {
        if let Some(tb) = traces.iter().find(|t| t.policy == b && t.trial == ta.trial && t.user == ta.user) {
            let (ra, rb) = (ta.final_regret(), tb.final_regret());
            if ra < rb {
                out.wins += 1;
            } else if ra > rb {
                out.losses += 1;
            } else {
                out.ties += 1;
            }
        }
    }
    out
}
