//! One-dimensional Fourier integrals of radial profiles,
//! Ψ_ρ(a) = ∫₀^∞ [e^{i2πar} − 1 − i2πarχ(r)] ρ(r) dr,
//! from which ψ(ξ) = Σ_m S_m Ψ_{ρ_m}(ξ·w_m).
//!
//! Pieces: a Taylor-series head below r₀ = 0.1/(2πa) (power-law extrapolated
//! to 0), log panels up to one period P = 1/a, half-period Gauss panels up to
//! R = 32P, and an integration-by-parts tail beyond R (R is a whole number of
//! periods, so the boundary terms reduce to ρ(R)/u, ρ′(R)/u², ρ″(R)/u³).

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Compensator, RadialProfile};
use crate::quad::{gl8, head_integral, lagrange6, log_integral, pairwise_sum, tail_integral};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
struct Level {
    log_panel: f64,
    periods: f64,
    sub: f64,
}

const COARSE: Level = Level { log_panel: 0.5, periods: 32.0, sub: 2.0 };
const FINE: Level = Level { log_panel: 0.25, periods: 64.0, sub: 4.0 };

fn one_minus_cos(x: f64) -> f64 {
    if x.abs() <= 0.1 {
        let x2 = x * x;
        x2 * (0.5 - x2 * (1.0 / 24.0 - x2 * (1.0 / 720.0 - x2 / 40320.0)))
    } else {
        2.0 * (0.5 * x).sin().powi(2)
    }
}

fn sin_minus_x(x: f64) -> f64 {
    if x.abs() <= 0.1 {
        let x2 = x * x;
        -x * x2 * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 / 362880.0)))
    } else {
        x.sin() - x
    }
}

/// Derivatives of ρ at r by finite differences; one-sided (backward) when
/// `left` so that a support endpoint is approached from inside.
fn derivs(p: &RadialProfile, r: f64, left: bool) -> (f64, f64, f64) {
    let f = |x: f64| (p.density)(x);
    let h = 1e-3 * r;
    if left {
        let (f0, f1, f2) = (f(r), f(r - h), f(r - 2.0 * h));
        (f0, (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h), (f0 - 2.0 * f1 + f2) / (h * h))
    } else {
        let (fm, f0, fp) = (f(r - h), f(r), f(r + h));
        (f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
    }
}

/// Composite Gauss panels of equal width on [lo, hi].
fn uniform(lo: f64, hi: f64, width: f64, g: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let k = ((hi - lo) / width).ceil().max(1.0) as usize;
    let w = (hi - lo) / k as f64;
    let rule = gl8();
    let parts: Vec<f64> = (0..k)
        .map(|i| {
            let a = lo + w * i as f64;
            rule.integrate(a, a + w, &g)
        })
        .collect();
    pairwise_sum(&parts)
}

/// Ψ_ρ(a) for one profile. `imag = false` skips the imaginary part (used for
/// antipodally symmetric measures, whose imaginary parts cancel exactly).
pub fn profile_symbol(p: &RadialProfile, a: f64, comp: Compensator, imag: bool, fine: bool) -> Complex64 {
    if a == 0.0 || !a.is_finite() {
        return Complex64::new(0.0, 0.0);
    }
    if a < 0.0 {
        return profile_symbol(p, -a, comp, imag, fine).conj();
    }
    let lv = if fine { FINE } else { COARSE };
    let u = TWO_PI * a;
    let s = p.support_max;
    let period = 1.0 / a;
    let r0 = (0.1 / u).min(s);
    let big_r = (lv.periods * period).min(s);
    let rho = |r: f64| p.eval(r);

    // Real part: −∫(1 − cos ur)ρ.
    let head = head_integral(r0 * 1e-8, r0, |r| one_minus_cos(u * r) * rho(r)).unwrap_or(f64::NAN);
    let mid = log_integral(r0, period.min(s), lv.log_panel, |r| one_minus_cos(u * r) * rho(r));
    let osc = uniform(period.min(s), big_r, period / lv.sub, |r| one_minus_cos(u * r) * rho(r));
    let mut re = head + mid + osc;
    if s > big_r {
        let mass = if s.is_finite() {
            log_integral(big_r, s, 0.25, rho)
        } else {
            tail_integral(big_r, big_r * 1e4, rho).unwrap_or(f64::NAN)
        };
        // ∫_R^S cos(ur)ρ by parts; sin(uR) = 0, cos(uR) = 1.
        let (_, d1r, _) = derivs(p, big_r, false);
        let mut cos_part = -d1r / (u * u);
        if s.is_finite() {
            let (f0, d1, d2) = derivs(p, s, true);
            let (sn, cs) = (u * s).sin_cos();
            cos_part += sn * f0 / u + cs * d1 / (u * u) - sn * d2 / (u * u * u);
        }
        re += mass - cos_part;
    }
    if !imag {
        return Complex64::new(-re, 0.0);
    }

    // Imaginary part: ∫(sin ur − urχ(r))ρ.
    let chi = |r: f64| comp.chi(r);
    let head_g = |r: f64| {
        let x = u * r;
        (if chi(r) == 1.0 { sin_minus_x(x) } else { x.sin() }) * rho(r)
    };
    let mut im = if comp == Compensator::UnitBall && r0 > 1.0 {
        head_integral(1e-8, 1.0, head_g).unwrap_or(f64::NAN) + log_integral(1.0, r0, 0.25, head_g)
    } else {
        head_integral(r0 * 1e-8, r0, head_g).unwrap_or(f64::NAN)
    };
    let sin_g = |r: f64| (u * r).sin() * rho(r);
    im += log_integral(r0, period.min(s), lv.log_panel, sin_g);
    im += uniform(period.min(s), big_r, period / lv.sub, sin_g);
    if s > big_r {
        let (f0, _, d2) = derivs(p, big_r, false);
        im += f0 / u - d2 / (u * u * u);
        if s.is_finite() {
            let (f0, d1, d2) = derivs(p, s, true);
            let (sn, cs) = (u * s).sin_cos();
            im += -cs * f0 / u + sn * d1 / (u * u) + cs * d2 / (u * u * u);
        }
    }
    // Remaining compensator −u∫_{r₀}^{...} rχρ.
    let first = |r: f64| r * rho(r);
    let comp_part = match comp {
        Compensator::None => 0.0,
        Compensator::UnitBall => log_integral(r0, s.min(1.0), 0.25, first),
        Compensator::Full => {
            if s.is_finite() {
                log_integral(r0, s, 0.25, first)
            } else {
                let c = r0.max(1.0);
                log_integral(r0, c, 0.25, first) + tail_integral(c, c * 1e6, first).unwrap_or(f64::NAN)
            }
        }
    };
    im -= u * comp_part;
    Complex64::new(-re, im)
}

/// Tabulated Ψ_ρ for a ∈ [1e-8, 1e8]: log(−Re Ψ) and Im Ψ/(−Re Ψ) against
/// log a with six-point Lagrange interpolation; direct evaluation outside.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    log_re: Vec<f64>,
    ratio: Vec<f64>,
    zero: bool,
}

const TABLE_LO_DEC: f64 = -8.0;
const TABLE_HI_DEC: f64 = 8.0;
const TABLE_PER_DECADE: usize = 32;

impl ProfileTable {
    pub fn build(p: &RadialProfile, comp: Compensator, imag: bool) -> Self {
        let n = ((TABLE_HI_DEC - TABLE_LO_DEC) * TABLE_PER_DECADE as f64).round() as usize + 1;
        let vals: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let a = 10f64.powf(TABLE_LO_DEC + k as f64 / TABLE_PER_DECADE as f64);
                profile_symbol(p, a, comp, imag, false)
            })
            .collect();
        let zero = vals.iter().all(|v| v.re == 0.0);
        let log_re = vals.iter().map(|v| (-v.re).max(f64::MIN_POSITIVE).ln()).collect();
        let ratio = vals.iter().map(|v| if v.re < 0.0 { v.im / -v.re } else { 0.0 }).collect();
        Self { log_re, ratio, zero }
    }

    /// Ψ at a > 0; power-law extrapolation below the table, None above it.
    pub fn lookup(&self, a: f64) -> Option<Complex64> {
        if self.zero {
            return Some(Complex64::new(0.0, 0.0));
        }
        let x = a.log10();
        let h = 1.0 / TABLE_PER_DECADE as f64;
        if x < TABLE_LO_DEC {
            let s = (self.log_re[1] - self.log_re[0]) / h;
            let m = (self.log_re[0] + s * (x - TABLE_LO_DEC)).exp();
            return Some(Complex64::new(-m, self.ratio[0] * m));
        }
        if !(x <= TABLE_HI_DEC) {
            return None;
        }
        let m = lagrange6(&self.log_re, TABLE_LO_DEC, h, x).exp();
        let q = lagrange6(&self.ratio, TABLE_LO_DEC, h, x);
        Some(Complex64::new(-m, q * m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn power(s: f64) -> RadialProfile {
        RadialProfile { density: Arc::new(move |r: f64| r.powf(-1.0 - s)), support_max: f64::INFINITY, label: "p".into() }
    }

    #[test]
    fn cauchy_half_line_is_pi_squared_a() {
        let p = power(1.0);
        for &a in &[1e-6, 0.3, 1.0, 17.0, 1e6] {
            let v = profile_symbol(&p, a, Compensator::UnitBall, false, false);
            let want = -std::f64::consts::PI.powi(2) * a;
            assert!((v.re / want - 1.0).abs() < 1e-8, "a={a}: {}", v.re / want);
        }
    }

    #[test]
    fn one_sided_stable_phase() {
        // ∫(e^{iur}−1) r^{−1−σ} dr = Γ(−σ)(−iu)^σ = Γ(−σ)u^σ e^{−iπσ/2}.
        let s = 0.5;
        let p = power(s);
        let a = 2.0;
        let v = profile_symbol(&p, a, Compensator::None, true, false);
        let u = TWO_PI * a;
        let g = statrs::function::gamma::gamma(-s) * u.powf(s);
        let want = Complex64::new(g * (std::f64::consts::FRAC_PI_2 * s).cos(), -g * (std::f64::consts::FRAC_PI_2 * s).sin());
        assert!((v - want).norm() / want.norm() < 1e-8, "{v} vs {want}");
    }

    #[test]
    fn compensated_one_sided_stable_phase() {
        // σ ∈ (1,2): ∫(e^{iur}−1−iur) r^{−1−σ} dr = Γ(−σ)(−iu)^σ.
        let s = 1.5;
        let p = power(s);
        let a = 0.7;
        let v = profile_symbol(&p, a, Compensator::Full, true, false);
        let u = TWO_PI * a;
        let g = statrs::function::gamma::gamma(-s) * u.powf(s);
        let want = Complex64::new(g * (std::f64::consts::FRAC_PI_2 * s).cos(), -g * (std::f64::consts::FRAC_PI_2 * s).sin());
        assert!((v - want).norm() / want.norm() < 1e-8, "{v} vs {want}");
    }

    #[test]
    fn truncated_profile_matches_fine_level() {
        let mut p = power(0.5);
        p.support_max = 1.0;
        for &a in &[0.01, 3.0, 250.0] {
            let c = profile_symbol(&p, a, Compensator::None, true, false);
            let f = profile_symbol(&p, a, Compensator::None, true, true);
            assert!((c - f).norm() / f.norm() < 1e-7, "a={a}: {c} {f}");
        }
    }

    #[test]
    fn table_reproduces_direct_values() {
        let p = power(0.8);
        let t = ProfileTable::build(&p, Compensator::None, true);
        for &a in &[3.3e-7, 0.123, 45.6] {
            let d = profile_symbol(&p, a, Compensator::None, true, false);
            let l = t.lookup(a).unwrap();
            assert!((d - l).norm() / d.norm() < 1e-8);
        }
    }
}
