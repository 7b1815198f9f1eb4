//! Subspace dimension against regret for users who live in a 5-dimensional subspace.
//!
//! cargo run --release --example k_sweep -- [trials] [horizon]

use cofine::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let trials = args.next().unwrap_or(10);
    let horizon = args.next().unwrap_or(1000);

    let cfg = ExperimentConfig {
        horizon,
        n_trials: trials,
        protocol: Protocol::SweepK(vec![2, 5, 10, 25]),
        ..ExperimentConfig::new(vec![PolicyConfig::new(Variant::CoFine), PolicyConfig::new(Variant::CoFineFocus)])
    };
    for p in run_protocol(&cfg, &Scenario::Synthetic { dim: 25, k_true: 5, k: 5, beta: 0.0 })? {
        println!(
            "K = {:>2}: cofine {:>8.2}   cofine_focus {:>8.2}",
            p.value,
            p.report.final_mean(Variant::CoFine).unwrap(),
            p.report.final_mean(Variant::CoFineFocus).unwrap()
        );
    }
    Ok(())
}
