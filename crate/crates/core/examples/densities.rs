//! Transition densities by Fourier inversion, and the self-similarity
//! p(t, x) = a(t)^{-d} p^{π̃_a}(1, x/a) for a stable measure.

use levy_spde::levy_measure::LevyMeasure;
use levy_spde::scaling::ScalingTriple;
use levy_spde::spectral::{density, scaling_identity_check, FrequencyGrid, SymbolTable};

fn main() -> levy_spde::Result<()> {
    let grid = FrequencyGrid::new(1, 512, 32.0)?;
    let pi = LevyMeasure::stable(1, 1.0)?;
    let table = SymbolTable::eval(&pi, &grid)?;
    for t in [0.5, 1.0, 2.0] {
        let p = density(&table, t, 0.0)?;
        let mid = grid.n() / 2;
        println!("t = {t}: mass {:.12}, p(t, 0) = {:.6}", p.integral(), p.values()[0].max(p.values()[mid]));
    }
    let kappa = ScalingTriple::power(0.5)?;
    let half = LevyMeasure::stable(1, 0.5)?;
    let rep = scaling_identity_check(&half, &kappa, &half, None, 0.5, &[0.25, 1.0, 4.0], &grid)?;
    for r in &rep.rows {
        println!("sigma 0.5, t = {}: a(t) = {:.4}, density identity error {:.2e}", r.t, r.a, r.density_rel);
    }
    Ok(())
}
