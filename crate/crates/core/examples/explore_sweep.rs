//! Shrinking the full-space exploration width.
//!
//! cargo run --release --example explore_sweep -- [trials] [horizon]

use cofine::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let trials = args.next().unwrap_or(10);
    let horizon = args.next().unwrap_or(1000);

    let cfg = ExperimentConfig {
        horizon,
        n_trials: trials,
        protocol: Protocol::SweepExplore(vec![0.0, 0.05, 0.1, 0.25, 0.5, 1.0]),
        ..ExperimentConfig::new(vec![PolicyConfig::new(Variant::CoFine)])
    };
    for beta in [0.1, 0.6] {
        println!("residual {beta}:");
        for p in run_protocol(&cfg, &Scenario::Synthetic { dim: 25, k_true: 5, k: 5, beta })? {
            println!("  eta = {:<5} regret {:>8.2}", p.value, p.report.final_mean(Variant::CoFine).unwrap());
        }
    }
    Ok(())
}
