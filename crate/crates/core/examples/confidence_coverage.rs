//! How often the true mean reward escapes CoFineUCB's confidence interval.
//!
//! cargo run --release --example confidence_coverage

use cofine::harness::coverage_check;
use cofine::prelude::*;

fn main() -> Result<()> {
    for literal in [false, true] {
        let policy = PolicyConfig { literal_constants: literal, ..PolicyConfig::new(Variant::CoFine) };
        let cfg = ExperimentConfig { horizon: 1000, n_trials: 20, ..ExperimentConfig::new(vec![policy.clone()]) };
        let report = run_synthetic(&cfg, 25, 5, 5, 0.1)?;
        let rates: Vec<f64> = report.traces.iter().map(RegretTrace::violation_rate).collect();
        let held = report.traces.iter().filter(|t| coverage_check(t, policy.delta)).count();
        let worst = rates.iter().copied().fold(0.0, f64::max);
        println!("literal constants = {literal}: coverage held in {held}/20 trials, worst violation rate {worst:.4}");
    }

    // The width at a fixed context shrinks as data accumulates.
    let (w, h) = gen_synthetic_wstar(25, 5, 0.1, 3)?;
    let env = EnvironmentSpec::new(w, 3);
    let mut policy = Policy::new(PolicyConfig::new(Variant::CoFine), h)?;
    let probe = cofine::environments::gen_contexts(&env, 10_000).remove(0);
    for t in 0..=1000u64 {
        if t % 250 == 0 {
            let terms = policy.ucb_terms(&probe)?;
            println!("t = {t:>4}: fine width {:.4}, coarse width {:.4}", terms.width, terms.width_tilde);
        }
        let contexts = cofine::environments::gen_contexts(&env, t);
        let x = contexts[policy.select(&contexts)?].clone();
        policy.update(&x, cofine::environments::sample_reward(&env, &x, t))?;
    }
    Ok(())
}
