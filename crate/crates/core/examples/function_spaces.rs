//! Littlewood-Paley blocks and the H / Besov norms of generalized smoothness.

use std::f64::consts::PI;

use levy_spde::function_spaces::{besov_norm, default_base, h_norm, BesovWeight, Field, LPSystem};
use levy_spde::levy_measure::LevyMeasure;
use levy_spde::scaling::ScalingTriple;
use levy_spde::spectral::{FrequencyGrid, GridFunction, SymbolTable};

fn main() -> levy_spde::Result<()> {
    let grid = FrequencyGrid::new(1, 256, 16.0)?;
    let kappa = ScalingTriple::power(1.0)?;
    let base = default_base(|e| kappa.l(e)).expect("a base exists for kappa(R) = R");
    let sys = LPSystem::new(base, &grid)?;
    println!("base {base}, {} shells, partition residual {:.1e}", sys.len(), sys.partition_residual());

    let f = GridFunction::from_fn(&grid, |x| (-PI * x[0] * x[0]).exp());
    println!("reconstruction error {:.1e}", sys.reconstruction_error(&f)?);
    let table = SymbolTable::eval(&LevyMeasure::stable(1, 1.0)?, &grid)?;
    let field = Field::scalar(f);
    for s in [0.0, 0.5, 1.0] {
        let h = h_norm(&field, &table, s, 2.0)?.value;
        let b = besov_norm(&field, &sys, BesovWeight::Bessel(&table), s, 2.0, 2.0)?.value;
        println!("s = {s}: |f|_H = {h:.6}, |f|_B22 = {b:.6}");
    }
    Ok(())
}
