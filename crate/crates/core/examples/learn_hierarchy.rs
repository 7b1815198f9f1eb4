//! Learn a coarse subspace from a generated population and inspect it.
//!
//! cargo run --release --example learn_hierarchy

use cofine::prelude::*;

fn main() -> Result<()> {
    let population = PopulationSpec { beta_max: 0.3, ..PopulationSpec::new(25, 5, 40) }.generate(7)?;
    let profiles = population.profiles();

    let h = learn_u(profiles, 5, false)?;
    println!("U: {}x{}, ||U||_F^2 = {:.6}", h.dim(), h.k(), h.u.norm_squared());
    println!("top singular values: {:.3?}", &h.singular_values.as_slice()[..5]);
    println!("omega diagonal: {:.3?}", h.omega.diagonal().as_slice());

    // How much of the true shared subspace the learned one captures.
    let overlap = (h.u0.transpose() * &population.basis).norm_squared() / 5.0;
    println!("subspace overlap with the generating basis: {overlap:.4}");

    let residuals: Vec<f64> =
        (0..profiles.len()).map(|i| decompose(&profiles.profile(i), &h).map(|d| d.s_perp)).collect::<Result<_>>()?;
    let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    println!("mean profile residual ||w_perp||: {mean:.4}");

    let ridged = learn_u(profiles, 5, true)?;
    println!("ridge variant omega diagonal: {:.3?}", ridged.omega.diagonal().as_slice());

    let u_d = learn_reshape(profiles)?;
    let composed = learn_composed(profiles, 5, false)?;
    println!(
        "reshape U_D: {}x{}, condition number {:.2}",
        u_d.nrows(),
        u_d.ncols(),
        composed.reshape_condition().unwrap_or(f64::NAN)
    );

    // Asking for more directions than the data supports is an error without the ridge.
    let tiny = ProfileSet::from_columns(&[RealVector::from_vec(vec![0.6, 0.8, 0.0])])?;
    match learn_u(&tiny, 2, false) {
        Err(e) => println!("K = 2 from one profile: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
