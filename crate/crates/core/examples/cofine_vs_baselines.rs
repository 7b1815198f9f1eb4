//! Every policy on the same synthetic users with paired seeds.
//!
//! cargo run --release --example cofine_vs_baselines -- [trials] [horizon]

use cofine::harness::paired_record;
use cofine::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let trials = args.next().unwrap_or(10);
    let horizon = args.next().unwrap_or(1000);

    let policies = [Variant::CoFine, Variant::CoFineFocus, Variant::NaiveLinUCB, Variant::SubspaceUCB];
    let cfg = ExperimentConfig {
        horizon,
        n_trials: trials,
        base_seed: 11,
        ..ExperimentConfig::new(policies.iter().map(|&v| PolicyConfig::new(v)).collect())
    };
    // D = 25, users within the first 5 coordinates up to a residual of 0.2.
    let report = run_synthetic(&cfg, 25, 5, 5, 0.2)?;

    println!("{:<14} {:>12} {:>10}", "policy", "regret", "stderr");
    for s in &report.series {
        println!("{:<14} {:>12.3} {:>10.3}", s.label, s.final_mean(), s.final_stderr());
    }
    let r = paired_record(&report.traces, "cofine", "naive");
    println!("cofine vs naive per trial: {} wins, {} ties, {} losses", r.wins, r.ties, r.losses);
    Ok(())
}
