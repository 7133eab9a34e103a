//! Symbols of a stable and a Bernstein-type Lévy measure, and the D/B
//! assumption check under their natural scalings.

use levy_spde::levy_measure::{
    check_assumptions, AlphaPair, BernsteinFamily, BernsteinKernel, LevyMeasure, Mu0Certificate,
};
use levy_spde::quad::logspace;
use levy_spde::scaling::ScalingTriple;
use levy_spde::spectral::{FrequencyGrid, SymbolTable};

fn main() -> levy_spde::Result<()> {
    let grid = FrequencyGrid::new(1, 64, 8.0)?;
    let stable = LevyMeasure::stable(1, 1.5)?;
    let kernel = BernsteinKernel::new(BernsteinFamily::PowerSum(vec![0.6, 0.8]), 1)?;
    let bern = LevyMeasure::bernstein(&kernel, 2, None)?;

    let ts = SymbolTable::eval(&stable, &grid)?;
    let tb = SymbolTable::eval(&bern, &grid)?;
    println!("{:>8} {:>14} {:>14}", "xi", "psi stable1.5", format!("psi {}", bern.label()));
    for k in (0..32).step_by(4) {
        println!("{:>8.3} {:>14.6} {:>14.6}", grid.xi(k)[0], ts.values()[k].re, tb.values()[k].re);
    }

    let r_grid = logspace(1e-3, 1e3, 7);
    let kappa = ScalingTriple::power(1.5)?;
    let mu0 = Mu0Certificate::power_law(&stable, 1.5, 1.0)?;
    let rep = check_assumptions(&stable, &kappa, &mu0, AlphaPair { alpha1: 2.0, alpha2: 1.25 }, &r_grid)?;
    println!("stable 1.5: D and B hold, N0 = {:.4}", rep.n0_moments);

    let kb = kernel.scaling()?;
    // Small-jump order 1.6, large-jump order 1.2: α₂ must stay below 1.2.
    let sigma = bern.sigma();
    let c = Mu0Certificate::largest_power_constant(&bern, &kb, sigma, &r_grid)?;
    let mu0 = Mu0Certificate::power_law(&bern, sigma, c)?;
    match check_assumptions(&bern, &kb, &mu0, AlphaPair { alpha1: 2.0, alpha2: 1.1 }, &r_grid) {
        Ok(rep) => println!("{}: D and B hold with mu0 constant {c:.3e}, N0 = {:.4}", bern.label(), rep.n0_moments),
        Err(e) => println!("{}: {e}", bern.label()),
    }
    Ok(())
}
