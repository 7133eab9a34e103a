use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cz::Cylinder;
use crate::error::{invalid, Error, Result};
use crate::levy_measure::LevyMeasure;
use crate::quad::{pairwise_sum, GaussLegendre};
use crate::scaling::ScalingTriple;
use crate::spectral::{FrequencyGrid, SymbolInterpolant, SymbolTable};

/// Tail share above which the outer-time truncation is rejected.
pub const TAIL_LIMIT: f64 = 0.1;
/// Plateau tolerance across δ.
pub const PLATEAU_TOL: f64 = 0.2;

const GL_NODES: usize = 8;
const INNER_PANELS: usize = 4;
const PANELS_PER_DECADE: f64 = 2.0;
const MIN_N: usize = 256;
const MAX_N: usize = 1 << 16;

/// Parameters of 𝓘(δ, s, y) = ∫[∫ χ_{Q_{C₀δ}(0)^c}|K(t−s, x−y) − K(t, x)| dx]² dt
/// with K(τ,x) = e^{−λτ} L^{μ;1/2} p^{π*}(τ, x) χ_{τ ≥ ε}.
pub struct HormanderSetup {
    pi: SymbolInterpolant,
    mu: SymbolInterpolant,
    kappa: ScalingTriple,
    pub c0: f64,
    pub lambda: f64,
    /// ε = eps_rel · κ(δ).
    pub eps_rel: f64,
    /// Outer truncation T_out.
    pub t_out: f64,
}

impl HormanderSetup {
    /// Checks C₀ > 3 and 3·l(1)·l(1/C₀) < 1; one space dimension.
    pub fn new(pi: &LevyMeasure, mu: &LevyMeasure, kappa: &ScalingTriple, c0: f64, lambda: f64, delta_max: f64) -> Result<Self> {
        if pi.dim() != 1 || mu.dim() != 1 {
            return invalid("the Hormander sweep is implemented for d = 1");
        }
        if !(c0 > 3.0) || !(3.0 * kappa.l(1.0) * kappa.l(1.0 / c0) < 1.0) {
            return invalid(format!("C0 = {c0} violates C0 > 3 and 3 l(1) l(1/C0) < 1"));
        }
        if !(lambda >= 0.0) {
            return invalid("lambda must be nonnegative");
        }
        Ok(Self {
            pi: SymbolInterpolant::new(pi),
            mu: SymbolInterpolant::new(mu),
            kappa: kappa.clone(),
            c0,
            lambda,
            eps_rel: 1e-2,
            t_out: 1e3 * kappa.kappa(delta_max),
        })
    }

    pub fn kappa(&self) -> &ScalingTriple {
        &self.kappa
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HormanderPoint {
    pub delta: f64,
    pub s: f64,
    pub y: f64,
    pub c0: f64,
    /// 𝓘 including the extrapolated tail.
    pub value: f64,
    /// Part with t ≤ 2|s|.
    pub inner: f64,
    /// Part with t > 2|s| (up to T_out).
    pub outer: f64,
    pub tail: f64,
    pub tail_share: f64,
}

struct Tables {
    grid: FrequencyGrid,
    psi: Vec<Complex64>,
    frac: Vec<f64>,
}

/// Per-evaluation cache of symbol tables on the dyadic family of grids.
struct Evaluator<'a> {
    setup: &'a HormanderSetup,
    cache: HashMap<(usize, i32), Tables>,
}

impl<'a> Evaluator<'a> {
    fn tables(&mut self, n: usize, dx_exp: i32) -> Result<&Tables> {
        if !self.cache.contains_key(&(n, dx_exp)) {
            let dx = 2f64.powi(dx_exp);
            let grid = FrequencyGrid::new(1, n, n as f64 * dx)?;
            let psi = SymbolTable::from_interpolant(&self.setup.pi, &grid).values().to_vec();
            let frac = SymbolTable::from_interpolant(&self.setup.mu, &grid).fractional(0.5);
            self.cache.insert((n, dx_exp), Tables { grid, psi, frac });
        }
        Ok(&self.cache[&(n, dx_exp)])
    }

    /// ∫_{region(t)} |K(t − s, x − y) − K(t, x)| dx, with the kernel pieces
    /// optionally restricted to the time shells in `only`.
    fn inner(&mut self, q: &Cylinder, t: f64, s: f64, y: f64, eps: f64, only: Option<(f64, f64)>) -> Result<f64> {
        let on = |tau: f64| tau >= eps && only.is_none_or(|(a, b)| tau >= a && tau < b);
        let (t1, t2) = (t - s, t);
        let (a1, a2) = (on(t1), on(t2));
        if !a1 && !a2 {
            return Ok(0.0);
        }
        let ball = q.meets_slice(t);
        let mut finest = f64::INFINITY;
        let mut widest: f64 = 0.0;
        for (tau, act) in [(t1, a1), (t2, a2)] {
            if act {
                finest = finest.min(tau / 2.0);
                widest = widest.max(tau);
            }
        }
        if ball {
            finest = finest.min(q.delta / 16.0);
        }
        let dx_exp = finest.log2().floor() as i32;
        let dx = 2f64.powi(dx_exp);
        let span = (200.0 * widest).max(32.0 * q.delta).max(4.0 * y.abs());
        let n = ((span / dx).ceil() as usize).next_power_of_two().clamp(MIN_N, MAX_N);
        let lambda = self.setup.lambda;
        let tab = self.tables(n, dx_exp)?;
        let g = &tab.grid;
        let mut spec = vec![Complex64::new(0.0, 0.0); g.len()];
        for (k, v) in spec.iter_mut().enumerate() {
            let xi = g.xi(k)[0];
            let (p, f) = (tab.psi[k], tab.frac[k]);
            if a1 {
                let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * xi * y);
                *v += f * ((p - lambda) * t1).exp() * phase;
            }
            if a2 {
                *v -= f * ((p - lambda) * t2).exp();
            }
        }
        g.inverse(&mut spec);
        let cell = g.dx();
        let vals: Vec<f64> = spec
            .iter()
            .enumerate()
            .filter(|(k, _)| !ball || g.x(*k)[0].abs() >= q.delta)
            .map(|(_, v)| v.re.abs())
            .collect();
        Ok(pairwise_sum(&vals) * cell)
    }
}

fn integrate_panels(
    rule: &GaussLegendre,
    pieces: &[(f64, f64, bool)],
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<Vec<(f64, f64)>> {
    // Returns (panel start, integral) per panel.
    let mut out = Vec::new();
    for &(a, b, log) in pieces {
        let mut err = None;
        let v = if log {
            rule.integrate(a.ln(), b.ln(), |u| {
                let t = u.exp();
                f(t).map(|v| v * t).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    0.0
                })
            })
        } else {
            rule.integrate(a, b, |t| {
                f(t).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    0.0
                })
            })
        };
        if let Some(e) = err {
            return Err(e);
        }
        out.push((a, v));
    }
    Ok(out)
}

/// Piecewise panels on [lo, hi]: uniform below `switch`, log-spaced above.
fn panels(breaks: &[f64], switch: f64) -> Vec<(f64, f64, bool)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        if a >= switch && a > 0.0 {
            let m = ((b / a).log10() * PANELS_PER_DECADE).ceil().max(1.0) as usize;
            let r = (b / a).powf(1.0 / m as f64);
            for k in 0..m {
                out.push((a * r.powi(k as i32), if k + 1 == m { b } else { a * r.powi(k as i32 + 1) }, true));
            }
        } else {
            let h = (b - a) / INNER_PANELS as f64;
            for k in 0..INNER_PANELS {
                out.push((a + k as f64 * h, if k + 1 == INNER_PANELS { b } else { a + (k + 1) as f64 * h }, false));
            }
        }
    }
    out
}

/// 𝓘(δ, s, y) for one shift, with the power-law tail beyond T_out.
pub fn hormander_integral(setup: &HormanderSetup, delta: f64, s: f64, y: f64) -> Result<HormanderPoint> {
    hormander_integral_with(setup, delta, s, y, setup.c0, setup.eps_rel * setup.kappa.kappa(delta))
}

fn hormander_integral_with(setup: &HormanderSetup, delta: f64, s: f64, y: f64, c0: f64, eps: f64) -> Result<HormanderPoint> {
    let kd = setup.kappa.kappa(delta);
    if s.abs() > kd * (1.0 + 1e-12) || y.abs() > delta * (1.0 + 1e-12) {
        return invalid("shifts must satisfy |s| <= kappa(delta), |y| <= delta");
    }
    let zero = HormanderPoint { delta, s, y, c0, value: 0.0, inner: 0.0, outer: 0.0, tail: 0.0, tail_share: 0.0 };
    if s == 0.0 && y == 0.0 {
        return Ok(zero);
    }
    let q = Cylinder::at_origin(c0 * delta, &setup.kappa, 1)?;
    let t_out = setup.t_out.max(10.0 * q.half_time);
    let lo = (s + eps).min(eps);
    let mut breaks = vec![lo, eps, s + eps, 0.0, q.half_time, -q.half_time, 2.0 * s.abs(), t_out];
    breaks.retain(|&b| b >= lo && b <= t_out);
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let switch = q.half_time;
    let rule = GaussLegendre::new(GL_NODES);
    let mut ev = Evaluator { setup, cache: HashMap::new() };
    let pieces = panels(&breaks, switch);
    let vals = integrate_panels(&rule, &pieces, |t| ev.inner(&q, t, s, y, eps, None).map(|v| v * v))?;
    let split = 2.0 * s.abs();
    let inner = pairwise_sum(&vals.iter().filter(|(a, _)| *a < split).map(|p| p.1).collect::<Vec<_>>());
    let outer = pairwise_sum(&vals.iter().filter(|(a, _)| *a >= split).map(|p| p.1).collect::<Vec<_>>());
    let f1 = ev.inner(&q, t_out / 2.0, s, y, eps, None)?.powi(2);
    let f2 = ev.inner(&q, t_out, s, y, eps, None)?.powi(2);
    let tail = if f2 == 0.0 {
        0.0
    } else {
        let decay = (f1 / f2).ln() / std::f64::consts::LN_2;
        if decay > 1.0 { f2 * t_out / (decay - 1.0) } else { f64::INFINITY }
    };
    let value = inner + outer + tail;
    let tail_share = if value > 0.0 { tail / value } else { 0.0 };
    Ok(HormanderPoint { delta, s, y, c0, value, inner, outer, tail, tail_share })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HormanderReport {
    pub points: Vec<HormanderPoint>,
    /// (δ, sup over shifts) per δ.
    pub per_delta: Vec<(f64, f64)>,
    pub sup: f64,
    /// Trend: least-squares slope of log sup against log δ.
    pub slope: f64,
}

impl HormanderReport {
    /// max/min of the per-δ sups minus one.
    pub fn variation(&self) -> f64 {
        let max = self.per_delta.iter().map(|p| p.1).fold(0.0, f64::max);
        let min = self.per_delta.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        max / min - 1.0
    }

    pub fn plateau(&self) -> bool {
        self.sup.is_finite() && self.variation() < PLATEAU_TOL
    }
}

/// Sweep 𝓘 over δ and shifts s = σ_s κ(δ), y = σ_y δ.
pub fn hormander_sweep(setup: &HormanderSetup, deltas: &[f64], s_fracs: &[f64], y_fracs: &[f64]) -> Result<HormanderReport> {
    if deltas.is_empty() || s_fracs.iter().chain(y_fracs).any(|f| f.abs() > 1.0) {
        return invalid("sweep needs deltas and shift fractions in [-1, 1]");
    }
    let jobs: Vec<(f64, f64, f64)> = deltas
        .iter()
        .flat_map(|&d| {
            let kd = setup.kappa.kappa(d);
            s_fracs.iter().flat_map(move |&sf| y_fracs.iter().map(move |&yf| (d, sf * kd, yf * d)))
        })
        .collect();
    let points: Vec<HormanderPoint> =
        jobs.par_iter().map(|&(d, s, y)| hormander_integral(setup, d, s, y)).collect::<Result<_>>()?;
    let worst = points.iter().map(|p| p.tail_share).fold(0.0, f64::max);
    if worst > TAIL_LIMIT {
        return Err(Error::TruncationDominant { share: worst });
    }
    let per_delta: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| (d, points.iter().filter(|p| p.delta == d).map(|p| p.value).fold(0.0, f64::max)))
        .collect();
    let sup = per_delta.iter().map(|p| p.1).fold(0.0, f64::max);
    let slope = if per_delta.len() > 1 {
        let x: Vec<f64> = per_delta.iter().map(|p| p.0.ln()).collect();
        let y: Vec<f64> = per_delta.iter().map(|p| p.1.ln()).collect();
        crate::quad::fit_slope(&x, &y)
    } else {
        0.0
    };
    Ok(HormanderReport { points, per_delta, sup, slope })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSensitivity {
    pub value: f64,
    pub value_half: f64,
    /// Minkowski bound 2√(𝓘S) + S from the ε-shell contribution S.
    pub shell_bound: f64,
}

/// Change of 𝓘 when ε is halved, against the shell contribution bound.
pub fn epsilon_sensitivity(setup: &HormanderSetup, delta: f64, s: f64, y: f64) -> Result<EpsilonSensitivity> {
    let eps = setup.eps_rel * setup.kappa.kappa(delta);
    let value = hormander_integral_with(setup, delta, s, y, setup.c0, eps)?.value;
    let value_half = hormander_integral_with(setup, delta, s, y, setup.c0, eps / 2.0)?.value;
    let q = Cylinder::at_origin(setup.c0 * delta, &setup.kappa, 1)?;
    let rule = GaussLegendre::new(GL_NODES);
    let mut ev = Evaluator { setup, cache: HashMap::new() };
    let shell = Some((eps / 2.0, eps));
    // Each shell holds only one of the two kernels; (a + b)² ≤ 2a² + 2b².
    let mut sh = 0.0;
    for start in [eps / 2.0, s + eps / 2.0] {
        let pieces = vec![(start, start + eps / 2.0, false)];
        let v = integrate_panels(&rule, &pieces, |t| {
            let a = ev.inner(&q, t, s, y, eps / 2.0, shell)?;
            Ok(a * a)
        })?;
        sh += 2.0 * v[0].1;
    }
    Ok(EpsilonSensitivity { value, value_half, shell_bound: 2.0 * (value * sh).sqrt() + sh })
}

/// 𝓘 at the same shift for a different C₀ (monotonicity checks).
pub fn hormander_integral_c0(setup: &HormanderSetup, delta: f64, s: f64, y: f64, c0: f64) -> Result<HormanderPoint> {
    hormander_integral_with(setup, delta, s, y, c0, setup.eps_rel * setup.kappa.kappa(delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cauchy() -> HormanderSetup {
        let c = LevyMeasure::stable(1, 1.0).unwrap();
        let k = ScalingTriple::power(1.0).unwrap();
        HormanderSetup::new(&c, &c, &k, 4.0, 0.0, 10.0).unwrap()
    }

    #[test]
    fn zero_shift_is_zero() {
        assert_eq!(hormander_integral(&cauchy(), 1.0, 0.0, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn precondition_on_c0() {
        let c = LevyMeasure::stable(1, 1.0).unwrap();
        let k = ScalingTriple::power(1.0).unwrap();
        assert!(HormanderSetup::new(&c, &c, &k, 2.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn smaller_c0_excludes_less() {
        let h = cauchy();
        let a = hormander_integral_c0(&h, 1.0, 0.5, 0.5, 4.0).unwrap().value;
        let b = hormander_integral_c0(&h, 1.0, 0.5, 0.5, 3.5).unwrap().value;
        assert!(a > 0.0 && b >= a * (1.0 - 1e-9), "{a} {b}");
    }
}
