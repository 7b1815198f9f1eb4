//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! cargo test --release --test acceptance

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cofine::cli::simulate;
use cofine::config::{load_config, ProtocolName, ScenarioName, SimConfig};
use cofine::environments::unit_sphere;
use cofine::harness::{cofine_regret_bound, coverage_check, SweepPoint};
use cofine::hierarchy::{learn_u, omega_objective, solve_omega, Decomposition, ProfileSet};
use cofine::numerics::{psd_sqrt, svd_top_k};
use cofine::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed < limit;
    let pass = out.pass && in_time;
    println!(
        "[{}] {name}: {} ({:.1}s of {}s allowed)",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn fd_gradient(f: impl Fn(&RealVector) -> f64, at: &RealVector) -> RealVector {
    let h = 1e-5;
    RealVector::from_fn(at.len(), |i, _| {
        let (mut plus, mut minus) = (at.clone(), at.clone());
        plus[i] += h;
        minus[i] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    })
}

fn squared_loss(w: &RealVector, feats: &[RealVector], ys: &[f64]) -> f64 {
    feats.iter().zip(ys).map(|(x, y)| (w.dot(x) - y).powi(2)).sum()
}

fn random_profiles(d: usize, n: usize, rng: &mut ChaCha8Rng) -> ProfileSet {
    let cols: Vec<_> = (0..n).map(|_| unit_sphere(d, rng) * rng.random_range(0.5..1.5)).collect();
    ProfileSet::from_columns(&cols).unwrap()
}

/// Largest finite-difference gradient entry of every estimator's objective at the
/// estimate, over one randomized instance.
fn worst_gradient(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(3..=12);
    let k = rng.random_range(1..=d);
    let n = rng.random_range(5..=60);
    let lambda = rng.random_range(0.5..3.0);
    let lambda_tilde = rng.random_range(0.5..3.0);
    let profiles = random_profiles(d, 2 * d, &mut rng);
    let h = learn_u(&profiles, k, false).unwrap().with_reshape(cofine::hierarchy::learn_reshape(&profiles).unwrap()).unwrap();
    let w_bar = unit_sphere(d, &mut rng) * 0.7;
    let w_star = unit_sphere(d, &mut rng);
    let xs: Vec<RealVector> = (0..n).map(|_| unit_sphere(d, &mut rng) * rng.random_range(0.3..1.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| w_star.dot(x) + 0.1 * rng.random_range(-1.0..1.0)).collect();

    let mut worst: f64 = 0.0;
    for variant in [Variant::CoFine, Variant::NaiveLinUCB, Variant::MeanRegularized, Variant::Reshape] {
        let cfg = PolicyConfig { lambda, lambda_tilde, w_bar: Some(w_bar.clone()), ..PolicyConfig::new(variant) };
        let mut p = Policy::new(cfg, h.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            p.update(x, *y).unwrap();
        }
        let s = p.state();
        let g = match variant {
            Variant::CoFine => {
                let coarse: Vec<_> = xs.iter().map(|x| h.project(x)).collect();
                let gc = fd_gradient(|w| squared_loss(w, &coarse, &ys) + lambda_tilde * w.norm_squared(), &s.w_hat_tilde);
                worst = worst.max(gc.amax());
                let prior = &h.u * &s.w_hat_tilde;
                fd_gradient(|w| squared_loss(w, &xs, &ys) + lambda * (w - &prior).norm_squared(), &s.w_hat)
            }
            Variant::NaiveLinUCB => fd_gradient(|w| squared_loss(w, &xs, &ys) + lambda * w.norm_squared(), &s.w_hat),
            Variant::MeanRegularized => {
                fd_gradient(|w| squared_loss(w, &xs, &ys) + lambda * (w - &w_bar).norm_squared(), &s.w_hat)
            }
            _ => {
                let u_d = h.u_d.as_ref().unwrap();
                let feats: Vec<_> = xs.iter().map(|x| u_d.tr_mul(x)).collect();
                fd_gradient(|w| squared_loss(w, &feats, &ys) + lambda * w.norm_squared(), &s.w_hat)
            }
        };
        worst = worst.max(g.amax());
    }
    worst
}

fn criterion_1() -> Outcome {
    let worst = (0..50).map(|s| worst_gradient(1000 + s)).fold(0.0, f64::max);
    Outcome { pass: worst <= 1e-6, detail: format!("max |grad| over 50 instances = {worst:.2e} (limit 1e-6)") }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_gain = f64::NEG_INFINITY;
    for _ in 0..20 {
        let d = rng.random_range(4..=15);
        let k = rng.random_range(2..=d.min(6));
        let n = rng.random_range(k..=3 * d);
        let w = RealMatrix::from_fn(d, n, |_, _| rng.random_range(-1.0..1.0));
        let (u0, _) = svd_top_k(&w, k).unwrap();
        let omega = solve_omega(&u0, &w).unwrap();
        let w0 = u0.transpose() * &w;
        let base = omega_objective(&omega, &w0);
        let root = psd_sqrt(&omega).unwrap();
        for _ in 0..100 {
            let eps = 10f64.powf(rng.random_range(-4.0..0.0));
            let g = RealMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
            let b = &root + g * eps;
            let raw = &b * b.transpose();
            let candidate = &raw * (k as f64 / raw.trace());
            worst_gain = worst_gain.max(base - omega_objective(&candidate, &w0));
        }
    }
    Outcome {
        pass: worst_gain <= 1e-9,
        detail: format!("largest improvement from 2000 trace-K PSD perturbations = {worst_gain:.2e} (limit 1e-9)"),
    }
}

fn coverage_config() -> SimConfig {
    SimConfig {
        protocol: ProtocolName::Single,
        scenario: ScenarioName::Synthetic,
        seed: 300,
        trials: 20,
        horizon: 1000,
        policies: vec![Variant::CoFine],
        delta: 0.1,
        sigma: 0.1,
        dim: 25,
        k: 5,
        k_true: 5,
        beta: 0.1,
        ..SimConfig::default()
    }
}

fn run(cfg: &SimConfig, out: &Path) -> Vec<SweepPoint> {
    simulate(cfg, out).expect("experiment runs")
}

fn criterion_3(points: &[SweepPoint]) -> Outcome {
    let traces: Vec<_> = points[0].report.traces.iter().collect();
    let held = traces.iter().filter(|t| t.violation_rate() <= 0.12).count();
    let worst = traces.iter().map(|t| t.violation_rate()).fold(0.0, f64::max);
    Outcome {
        pass: traces.len() == 20 && held >= 19,
        detail: format!("violation rate ≤ 0.12 in {held}/{} trials, worst rate {worst:.4}", traces.len()),
    }
}

fn criterion_8(cfg: &SimConfig, points: &[SweepPoint]) -> Outcome {
    let policy = &cfg.policy_configs()[0];
    let mut checked = 0;
    let mut broken = 0;
    let mut tightest: f64 = 0.0;
    for tr in &points[0].report.traces {
        if !coverage_check(tr, policy.delta) {
            continue;
        }
        checked += 1;
        let (s_tilde, s_perp) = tr.oracle.expect("hierarchical trace carries its norms");
        let d = Decomposition { w_tilde: RealVector::zeros(0), w_perp: RealVector::zeros(0), s_tilde, s_perp };
        let bound = cofine_regret_bound(policy, &d, cfg.dim, cfg.k, cfg.horizon);
        if tr.cum.iter().enumerate().any(|(t, c)| *c > bound[t + 1]) {
            broken += 1;
        }
        tightest = tightest.max(tr.cum.iter().enumerate().map(|(t, c)| c / bound[t + 1]).fold(0.0, f64::max));
    }
    Outcome {
        pass: checked > 0 && broken == 0,
        detail: format!("{checked} covered trials, {broken} exceed the bound; max regret/bound ratio {tightest:.4}"),
    }
}

fn population_config() -> SimConfig {
    SimConfig {
        protocol: ProtocolName::LeaveOneOut,
        scenario: ScenarioName::Population,
        seed: 400,
        trials: 1,
        horizon: 2000,
        policies: vec![Variant::CoFine, Variant::CoFineFocus, Variant::NaiveLinUCB, Variant::MeanRegularized],
        dim: 25,
        k: 5,
        k_true: 5,
        population_n: 40,
        beta_min: 0.0,
        beta_max: 0.3,
        population_seed: 41,
        ..SimConfig::default()
    }
}

fn criterion_4(points: &[SweepPoint]) -> Outcome {
    let r = &points[0].report;
    let naive = r.final_mean(Variant::NaiveLinUCB).unwrap();
    let ratio = |v| r.final_mean(v).unwrap() / naive;
    let (cf, focus, mean_reg) = (ratio(Variant::CoFine), ratio(Variant::CoFineFocus), ratio(Variant::MeanRegularized));
    let n = r.series[0].n;
    Outcome {
        pass: n >= 20 && cf <= 0.8 && focus <= 0.8 && (0.9..=1.1).contains(&mean_reg),
        detail: format!("{n} traces; relative to naive: cofine {cf:.3}, cofine_focus {focus:.3}, mean_regularized {mean_reg:.3}"),
    }
}

fn held_out_config() -> SimConfig {
    SimConfig {
        protocol: ProtocolName::Single,
        held_out_users: 20,
        held_out_beta: 0.9,
        seed: 500,
        policies: vec![Variant::CoFine, Variant::SubspaceUCB],
        ..population_config()
    }
}

fn criterion_5(points: &[SweepPoint]) -> Outcome {
    let r = &points[0].report;
    let quarter = r.horizon / 4;
    let mean_over = |v, from, to| {
        let traces: Vec<_> = r.traces_for(v).collect();
        traces.iter().map(|t| t.mean_regret(from, to)).sum::<f64>() / traces.len() as f64
    };
    let sub_last = mean_over(Variant::SubspaceUCB, r.horizon - quarter, r.horizon);
    let sub_all = mean_over(Variant::SubspaceUCB, 0, r.horizon);
    let cf_first = mean_over(Variant::CoFine, 0, quarter);
    let cf_last = mean_over(Variant::CoFine, r.horizon - quarter, r.horizon);
    Outcome {
        pass: sub_last > 0.5 * sub_all && cf_last <= 0.5 * cf_first,
        detail: format!(
            "subspace last-quarter/overall per-round regret {:.3}; cofine last/first quarter {:.3}",
            sub_last / sub_all,
            cf_last / cf_first
        ),
    }
}

fn beta_sweep_config() -> SimConfig {
    SimConfig {
        protocol: ProtocolName::SweepBeta,
        scenario: ScenarioName::Synthetic,
        seed: 600,
        trials: 20,
        horizon: 2000,
        betas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        policies: vec![Variant::CoFineFocus, Variant::SubspaceUCB, Variant::NaiveLinUCB],
        dim: 25,
        k: 5,
        k_true: 5,
        ..SimConfig::default()
    }
}

fn finals(points: &[SweepPoint], v: Variant) -> Vec<f64> {
    points.iter().map(|p| p.report.final_mean(v).unwrap()).collect()
}

fn non_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0])
}

fn fmt(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.1}")).collect::<Vec<_>>().join(", ")
}

fn criterion_6(points: &[SweepPoint]) -> Outcome {
    let sub = finals(points, Variant::SubspaceUCB);
    let focus = finals(points, Variant::CoFineFocus);
    let naive_at_1 = points.last().unwrap().report.final_mean(Variant::NaiveLinUCB).unwrap();
    Outcome {
        pass: non_decreasing(&sub) && non_decreasing(&focus) && sub[sub.len() - 1] > naive_at_1,
        detail: format!("subspace [{}], cofine_focus [{}], naive at β=1 {naive_at_1:.1}", fmt(&sub), fmt(&focus)),
    }
}

fn k_sweep_config() -> SimConfig {
    SimConfig {
        protocol: ProtocolName::SweepK,
        seed: 700,
        ks: vec![2, 5, 10, 25],
        beta: 0.0,
        policies: vec![Variant::CoFine, Variant::CoFineFocus],
        ..beta_sweep_config()
    }
}

fn criterion_7(points: &[SweepPoint]) -> Outcome {
    let from_true: Vec<_> = points.iter().filter(|p| p.value >= 5.0).cloned().collect();
    let cf = finals(&from_true, Variant::CoFine);
    let focus = finals(&from_true, Variant::CoFineFocus);
    Outcome {
        pass: from_true.len() == 3 && non_decreasing(&cf) && non_decreasing(&focus),
        detail: format!("K = 5, 10, 25: cofine [{}], cofine_focus [{}]", fmt(&cf), fmt(&focus)),
    }
}

fn csv_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    files
}

fn criterion_9(dirs: &[(&str, std::path::PathBuf)], scratch: &Path) -> Outcome {
    let mut compared = 0;
    let mut differing = Vec::new();
    for (name, dir) in dirs {
        let cfg = load_config(&dir.join("manifest.toml")).expect("manifest parses");
        let again = scratch.join(format!("{name}_rerun"));
        run(&cfg, &again);
        let (a, b) = (csv_files(dir), csv_files(&again));
        if a.iter().map(|p| p.file_name()).ne(b.iter().map(|p| p.file_name())) {
            differing.push(format!("{name}: file sets differ"));
            continue;
        }
        for (pa, pb) in a.iter().zip(&b) {
            compared += 1;
            if std::fs::read(pa).unwrap() != std::fs::read(pb).unwrap() {
                differing.push(format!("{name}/{}", pa.file_name().unwrap().to_string_lossy()));
            }
        }
    }
    Outcome {
        pass: compared > 0 && differing.is_empty(),
        detail: format!("{compared} CSV files re-generated from manifests, {} differ {:?}", differing.len(), differing),
    }
}

fn main() {
    let scratch = tempfile::tempdir().unwrap();
    let dir = |name: &str| scratch.path().join(name);
    let mut results = Vec::new();

    results.push(check("criterion 1, estimator gradients vanish", minutes(1), criterion_1));
    results.push(check("criterion 2, omega is optimal", minutes(1), criterion_2));

    let cov_cfg = coverage_config();
    let mut cov_points = Vec::new();
    results.push(check("criterion 3, confidence coverage", minutes(5), || {
        cov_points = run(&cov_cfg, &dir("coverage"));
        criterion_3(&cov_points)
    }));
    results
        .push(check("criterion 4, leave-one-out ordering", minutes(15), || criterion_4(&run(&population_config(), &dir("loo")))));
    results.push(check("criterion 5, held-out residual users", minutes(10), || {
        criterion_5(&run(&held_out_config(), &dir("held_out")))
    }));
    results.push(check("criterion 6, residual sweep trend", minutes(15), || {
        criterion_6(&run(&beta_sweep_config(), &dir("beta_sweep")))
    }));
    results.push(check("criterion 7, subspace dimension trend", minutes(15), || {
        criterion_7(&run(&k_sweep_config(), &dir("k_sweep")))
    }));
    results.push(check("criterion 8, regret stays under the bound", minutes(1), || criterion_8(&cov_cfg, &cov_points)));

    let dirs: Vec<_> = ["coverage", "loo", "held_out", "beta_sweep", "k_sweep"].iter().map(|n| (*n, dir(n))).collect();
    results.push(check("criterion 9, manifest reruns are byte-identical", minutes(60), || criterion_9(&dirs, scratch.path())));

    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
