//! Regret as users move out of the shared subspace.
//!
//! cargo run --release --example beta_sweep -- [trials] [horizon]

use cofine::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let trials = args.next().unwrap_or(10);
    let horizon = args.next().unwrap_or(1000);

    let policies = [Variant::CoFineFocus, Variant::SubspaceUCB, Variant::NaiveLinUCB];
    let cfg = ExperimentConfig {
        horizon,
        n_trials: trials,
        protocol: Protocol::SweepBeta(vec![0.0, 0.25, 0.5, 0.75, 1.0]),
        ..ExperimentConfig::new(policies.iter().map(|&v| PolicyConfig::new(v)).collect())
    };
    let points = run_protocol(&cfg, &Scenario::Synthetic { dim: 25, k_true: 5, k: 5, beta: 0.0 })?;

    print!("{:>6}", "beta");
    for v in policies {
        print!(" {:>14}", v.name());
    }
    println!();
    for p in &points {
        print!("{:>6.2}", p.value);
        for v in policies {
            print!(" {:>14.2}", p.report.final_mean(v).unwrap());
        }
        println!();
    }
    Ok(())
}
