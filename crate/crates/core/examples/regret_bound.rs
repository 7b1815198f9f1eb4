//! Empirical regret next to the theoretical bound curve.
//!
//! cargo run --release --example regret_bound

use cofine::harness::linucb_bound;
use cofine::prelude::*;

fn main() -> Result<()> {
    let (w, h) = gen_synthetic_wstar(25, 5, 0.2, 5)?;
    let policy = PolicyConfig::new(Variant::CoFine);
    let d = decompose(&w, &h)?;
    let horizon = 2000;

    let trace = run_trial(&EnvironmentSpec::new(w.clone(), 0), &policy, &h, horizon, 5)?;
    let bound = cofine_regret_bound(&policy, &d, 25, 5, horizon);
    let flat = linucb_bound(&policy, w.norm(), 25, horizon);

    println!("S~ = {:.3}, S_perp = {:.3}", d.s_tilde, d.s_perp);
    println!("{:>6} {:>10} {:>12} {:>12}", "t", "regret", "bound", "linucb bound");
    for t in [100, 250, 500, 1000, 2000] {
        println!("{t:>6} {:>10.2} {:>12.1} {:>12.1}", trace.cum[t - 1], bound[t], flat[t]);
    }
    Ok(())
}
