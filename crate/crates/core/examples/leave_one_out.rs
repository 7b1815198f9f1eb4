//! Leave-one-out over a profile population: each profile plays the user while
//! the hierarchy, the reshaping and the mean prior are learned from the rest.
//!
//! cargo run --release --example leave_one_out -- [horizon]

use cofine::prelude::*;

fn main() -> Result<()> {
    let horizon = std::env::args().nth(1).map_or(1000, |a| a.parse().expect("horizon"));
    let population = PopulationSpec { beta_max: 0.3, ..PopulationSpec::new(25, 5, 40) }.generate(1)?;

    let cfg = ExperimentConfig {
        horizon,
        n_trials: 1,
        ..ExperimentConfig::new(Variant::ALL.iter().map(|&v| PolicyConfig::new(v)).collect())
    };
    let report = leave_one_out(population.profiles(), 5, false, false, &cfg)?;

    let naive = report.final_mean(Variant::NaiveLinUCB).unwrap();
    for s in &report.series {
        println!("{:<18} {:>9.2} ± {:<6.2} ({:.2}x naive)", s.label, s.final_mean(), s.final_stderr(), s.final_mean() / naive);
    }
    Ok(())
}
