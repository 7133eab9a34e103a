//! Empirical constants of the a priori estimates on a small ensemble, the
//! exact p = 2 bound, and a Hörmander sweep.

use levy_spde::estimates::{
    hormander_sweep, plancherel_p2, t1_ensemble, verify_t1, HormanderSetup, T1Config,
};
use levy_spde::levy_measure::LevyMeasure;
use levy_spde::scaling::ScalingTriple;

fn main() -> levy_spde::Result<()> {
    let cases = t1_ensemble(256, 16.0, 1.0, 256)?;
    let cfg = T1Config { p_grid: vec![2.0, 4.0], n_low: 100, n_high: 200, ..T1Config::default() };
    let rep = verify_t1(&cases[4..8], &cfg)?;
    for r in rep.rows.iter().filter(|r| r.lambda == 1.0) {
        println!("{:>2} {:<14} p={} C = {:.3} ({})", r.inequality, r.case, r.p, r.constant, r.verdict);
    }
    for s in &rep.slopes {
        println!("rho slope {} p={}: {:.3}", s.case, s.p, s.slope);
    }

    let spec = &cases[6].spec;
    let pl = plancherel_p2(&spec.pi, &spec.mu, &spec.phi, &spec.marks, 0.0, 1.0, 0.0, 1)?;
    println!("p = 2 constant {:.4} <= bound {:.4}", pl.constant, pl.bound);

    let pi = LevyMeasure::stable(1, 1.0)?;
    let kappa = ScalingTriple::power(1.0)?;
    let setup = HormanderSetup::new(&pi, &pi, &kappa, 4.0, 0.0, 10.0)?;
    let h = hormander_sweep(&setup, &[0.1, 1.0, 10.0], &[0.0, 1.0], &[0.0, 1.0])?;
    println!("Hormander integral: sup {:.4}, variation across delta {:.3}", h.sup, h.variation());
    Ok(())
}
