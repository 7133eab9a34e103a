use num_complex::Complex64;

use super::grid::{GridFunction, Spectrum};
use super::symbol::SymbolTable;
use crate::error::{Error, Result};

/// Largest admissible |e^{tψ}| at the Nyquist frequency.
pub const ALIASING_TOL: f64 = 1e-8;

fn check_resolution(table: &SymbolTable, t: f64) -> Result<()> {
    let g = table.grid();
    let decay = (0..g.len())
        .filter(|&i| g.is_nyquist(i))
        .map(|i| (table.values()[i].re * t).exp())
        .fold(0.0, f64::max);
    if decay > ALIASING_TOL {
        return Err(Error::AliasingDetected { t, decay });
    }
    Ok(())
}

/// Spectrum of e^{−λt} p^π(t, ·), i.e. e^{(conj ψ − λ)t}.
pub fn density_spectrum(table: &SymbolTable, t: f64, lambda: f64) -> Result<Spectrum> {
    spectrum(table, t, lambda, true)
}

/// Spectrum of e^{−λt} p^{π*}(t, ·) = e^{(ψ − λ)t}, the kernel G^λ.
pub fn adjoint_spectrum(table: &SymbolTable, t: f64, lambda: f64) -> Result<Spectrum> {
    spectrum(table, t, lambda, false)
}

fn spectrum(table: &SymbolTable, t: f64, lambda: f64, conj: bool) -> Result<Spectrum> {
    if !(t > 0.0) || !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("density needs t > 0 and lambda >= 0 (t = {t}, lambda = {lambda})")));
    }
    check_resolution(table, t)?;
    Ok(Spectrum::from_fn_indexed(table.grid(), |i| {
        let p = table.values()[i];
        let p = if conj { p.conj() } else { p };
        ((p - lambda) * t).exp()
    }))
}

/// Transition density of Z^π damped by e^{−λt}.
pub fn density(table: &SymbolTable, t: f64, lambda: f64) -> Result<GridFunction> {
    Ok(density_spectrum(table, t, lambda)?.ifft())
}

/// Density of −Z^π (the kernel of the equation's Green function).
pub fn density_adjoint(table: &SymbolTable, t: f64, lambda: f64) -> Result<GridFunction> {
    Ok(adjoint_spectrum(table, t, lambda)?.ifft())
}

/// T_t f = E f(· + Z_t): multiplier e^{ψt} (no resolution check).
pub fn semigroup(table: &SymbolTable, f: &GridFunction, t: f64) -> Result<GridFunction> {
    table.grid().check_same(f.grid())?;
    let m: Vec<Complex64> = table.values().iter().map(|p| (p * t).exp()).collect();
    Ok(f.fft().mul(&m).ifft())
}

/// Empirical c₁, c₂ with c₁|ψ^μ| ≤ |ψ^π| ≤ c₂|ψ^μ| over nonzero nodes.
pub fn comparability(pi: &SymbolTable, mu: &SymbolTable) -> Result<(f64, f64)> {
    pi.grid().check_same(mu.grid())?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (a, b) in pi.values().iter().zip(mu.values()).skip(1) {
        let r = a.norm() / b.norm();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_measure::LevyMeasure;
    use crate::spectral::FrequencyGrid;
    use std::f64::consts::PI;

    #[test]
    fn cauchy_density_closed_form() {
        let g = FrequencyGrid::new(1, 1024, 64.0).unwrap();
        let tab = SymbolTable::from_fn(&g, |xi| Complex64::new(-2.0 * PI * PI * xi[0].abs(), 0.0));
        let p = density(&tab, 1.0, 0.0).unwrap();
        // Periodized Cauchy: Σ_m t/((πt)² + (x + mL)²) has the closed form below.
        let (t, l) = (1.0, 64.0);
        for i in (0..g.len()).step_by(37) {
            let x = g.x(i)[0];
            let a = 2.0 * PI * PI * t / l;
            let b = 2.0 * PI * x / l;
            let want = a.sinh() / (a.cosh() - b.cos()) / l;
            assert!((p.values()[i] - want).abs() < 1e-12, "{x}: {} vs {want}", p.values()[i]);
        }
        assert!((p.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aliasing_is_reported() {
        let pi = LevyMeasure::stable(1, 1.0).unwrap();
        let g = FrequencyGrid::new(1, 16, 64.0).unwrap();
        let tab = SymbolTable::eval(&pi, &g).unwrap();
        assert!(matches!(density(&tab, 1e-3, 0.0), Err(Error::AliasingDetected { .. })));
    }

    #[test]
    fn damping_and_semigroup() {
        let pi = LevyMeasure::stable(1, 1.5).unwrap();
        let g = FrequencyGrid::new(1, 256, 32.0).unwrap();
        let tab = SymbolTable::eval(&pi, &g).unwrap();
        let p = density(&tab, 0.5, 2.0).unwrap();
        assert!((p.integral() - (-1.0f64).exp()).abs() < 1e-10);
        let a = density_spectrum(&tab, 0.3, 0.0).unwrap();
        let b = density_spectrum(&tab, 0.2, 0.0).unwrap();
        let c = density(&tab, 0.5, 0.0).unwrap();
        let ab = a.mul(b.values()).ifft();
        let err = ab.sub(&c).unwrap().sup_norm();
        assert!(err < 1e-10 * c.sup_norm());
    }
}
