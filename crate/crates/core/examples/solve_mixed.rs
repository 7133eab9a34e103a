//! Mild solution of the mixed problem along one jump path, and the order of
//! the integral-form residual under step refinement.

use levy_spde::cli::suites::mixed_benchmark;
use levy_spde::jump_noise::sample_path;
use levy_spde::levy_measure::LevyMeasure;
use levy_spde::solver::{residual_order, solve};
use levy_spde::spectral::{FrequencyGrid, SymbolTable};

fn main() -> levy_spde::Result<()> {
    let grid = FrequencyGrid::new(1, 256, 16.0)?;
    let table = SymbolTable::eval(&LevyMeasure::stable(1, 1.0)?, &grid)?;
    let spec = mixed_benchmark(table, 1.0)?.with_steps(128);
    let path = sample_path(&spec.marks, spec.horizon, 5)?;
    let sol = solve(&spec, &path)?;
    let u = sol.total.last_value();
    println!("{} nodes, {} jumps, |u(T)|_L2 = {:.6}", sol.nodes().len(), path.events.len(), u.lp_norm(2.0));
    let r = residual_order(&spec, &path, &[32, 64, 128, 256])?;
    for (s, v) in r.steps.iter().zip(&r.residuals) {
        println!("steps {s:>4}: residual {v:.3e}");
    }
    println!("fitted order {:.3}", r.order);
    Ok(())
}
