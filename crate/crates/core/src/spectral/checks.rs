//! Numerical verification of the subordination formula for L^{μ;δ}, the
//! scaling identities for p^π and the tail / mean-value bounds.

use statrs::function::gamma::gamma;

use super::density::density_spectrum;
use super::grid::{lp_norm, FrequencyGrid, GridFunction, Spectrum};
use super::symbol::{SymbolInterpolant, SymbolTable};
use crate::error::{invalid, Error, Result};
use crate::levy_measure::LevyMeasure;
use crate::quad::GaussLegendre;
use crate::scaling::ScalingTriple;

/// c_δ = δ / Γ(1 − δ).
pub fn c_delta(delta: f64) -> f64 {
    delta / gamma(1.0 - delta)
}

#[derive(Debug, Clone)]
pub struct SubordinationReport {
    pub delta: f64,
    pub spectral: GridFunction,
    pub time_quadrature: GridFunction,
    pub sup_abs: f64,
    /// sup_abs divided by the sup norm of the spectral side.
    pub sup_rel: f64,
}

const SUB_T_MIN: f64 = 1e-6;
const SUB_T_MAX: f64 = 1e6;
const SUB_NODES_PER_SIDE: usize = 200;

/// c_δ ∫₀^∞ t^{−δ}(e^{ψt} − 1) dt/t split at `a`: integration by parts below
/// (the Itô-corrected form), direct quadrature above.
fn subordination_multiplier(psi: f64, delta: f64, a: f64, rule: &GaussLegendre) -> f64 {
    if psi == 0.0 {
        return 0.0;
    }
    let small_head = psi * (SUB_T_MIN.powf(1.0 - delta) / (1.0 - delta) - a.powf(-delta) * SUB_T_MIN) / delta;
    let small = rule.integrate(SUB_T_MIN.ln(), a.ln(), |s| {
        let r = s.exp();
        psi * (psi * r).exp() * (r.powf(-delta) - a.powf(-delta)) / delta * r
    });
    let large = rule.integrate(a.ln(), SUB_T_MAX.ln(), |s| {
        let t = s.exp();
        t.powf(-delta) * (psi * t).exp()
    }) - a.powf(-delta) / delta;
    c_delta(delta) * (small_head + small + large)
}

/// L^{μ;δ}f computed spectrally and by time quadrature of the subordination
/// formula; `table_mu` must be real (symmetric μ).
pub fn subordination_check(table_mu: &SymbolTable, delta: f64, f: &GridFunction, a_cut: f64) -> Result<SubordinationReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("subordination needs delta in (0,1), got {delta}"));
    }
    if !(a_cut > SUB_T_MIN && a_cut < SUB_T_MAX) {
        return invalid(format!("a_cut = {a_cut} outside the quadrature range"));
    }
    if !table_mu.is_real() {
        return invalid("subordination check needs a symmetric measure");
    }
    table_mu.grid().check_same(f.grid())?;
    let rule = GaussLegendre::new(SUB_NODES_PER_SIDE);
    let fhat = f.fft();
    let spectral = fhat.mul_real(&table_mu.fractional(delta)).ifft();
    let m: Vec<f64> = table_mu.sym_values().iter().map(|&p| subordination_multiplier(p, delta, a_cut, &rule)).collect();
    let time_quadrature = fhat.mul_real(&m).ifft();
    let sup_abs = spectral.sub(&time_quadrature)?.sup_norm();
    let scale = spectral.sup_norm();
    let sup_rel = if scale > 0.0 { sup_abs / scale } else { sup_abs };
    Ok(SubordinationReport { delta, spectral, time_quadrature, sup_abs, sup_rel })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub t: f64,
    pub a: f64,
    /// Max pointwise relative error of p^π(t,x) = a^{−d}p^{π̃}(1, x/a), |x| ≤ 3a.
    pub density_rel: f64,
    /// Sup-normalized error of the L^{μ;δ} identity.
    pub fractional_rel: f64,
    /// Sup-normalized error of the L^η L^{μ;δ} identity (NaN without η).
    pub eta_rel: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    pub fn max_error(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| [r.density_rel, r.fractional_rel, r.eta_rel])
            .filter(|v| !v.is_nan())
            .fold(0.0, f64::max)
    }
}

fn sup_rel_err(lhs: &[f64], rhs: &[f64], mask: &[bool]) -> f64 {
    let scale = lhs.iter().zip(mask).filter(|p| *p.1).map(|p| p.0.abs()).fold(0.0, f64::max);
    lhs.iter()
        .zip(rhs)
        .zip(mask)
        .filter(|p| *p.1)
        .map(|((a, b), _)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE)
}

/// Both sides of the three scaling identities on grids with the same node
/// count: the left side on box L·a(t), the right on box L (the grid passed
/// in), so that node k of one matches node k of the other.
pub fn scaling_identity_check(
    pi: &LevyMeasure,
    kappa: &ScalingTriple,
    mu: &LevyMeasure,
    eta: Option<(&LevyMeasure, &LevyMeasure)>,
    delta: f64,
    t_grid: &[f64],
    grid: &FrequencyGrid,
) -> Result<ScalingReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0,1), got {delta}"));
    }
    if !mu.is_symmetric() {
        return invalid("mu must be symmetric");
    }
    let d = grid.dim() as i32;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let a = kappa.a(t);
        if !(a.is_finite() && a > 0.0) || grid.dx() * a < 1e-12 || grid.box_len() * a > 1e12 {
            return Err(Error::GridMismatch(format!("a({t}) = {a} leaves the resolvable range")));
        }
        let left_grid = grid.with_box(grid.box_len() * a)?;
        let pi_r = pi.rescale(a, kappa)?;
        let mu_r = mu.rescale(a, kappa)?;
        let l_pi = SymbolTable::eval(pi, &left_grid)?;
        let l_mu = SymbolTable::eval(mu, &left_grid)?;
        let r_pi = SymbolTable::eval(&pi_r, grid)?;
        let r_mu = SymbolTable::eval(&mu_r, grid)?;

        let l_p = density_spectrum(&l_pi, t, 0.0)?;
        let r_p = density_spectrum(&r_pi, 1.0, 0.0)?;
        let mask: Vec<bool> = (0..grid.len()).map(|i| grid.norm_x(i) <= 3.0 + 1e-12).collect();
        let ad = a.powi(-d);

        let lv = l_p.ifft();
        let rv: Vec<f64> = r_p.ifft().values().iter().map(|v| ad * v).collect();
        let density_rel = lv
            .values()
            .iter()
            .zip(&rv)
            .zip(&mask)
            .filter(|p| *p.1)
            .map(|((x, y), _)| ((x - y) / x).abs())
            .fold(0.0, f64::max);

        let l_f = l_p.mul_real(&l_mu.fractional(delta));
        let r_f = r_p.mul_real(&r_mu.fractional(delta));
        let lfv = l_f.ifft();
        let rfv: Vec<f64> = r_f.ifft().values().iter().map(|v| ad * v / t.powf(delta)).collect();
        let fractional_rel = sup_rel_err(lfv.values(), &rfv, &mask);

        let eta_rel = match eta {
            None => f64::NAN,
            Some((e1, e2)) => {
                let l_eta = SymbolTable::eval(e1, &left_grid)?.combine(1.0, &SymbolTable::eval(e2, &left_grid)?, -1.0)?;
                let r_eta = SymbolTable::eval(&e1.rescale(a, kappa)?, grid)?
                    .combine(1.0, &SymbolTable::eval(&e2.rescale(a, kappa)?, grid)?, -1.0)?;
                let lv = l_f.mul(l_eta.values()).ifft();
                let rv: Vec<f64> = r_f.mul(r_eta.values()).ifft().values().iter().map(|v| ad * v / t.powf(1.0 + delta)).collect();
                sup_rel_err(lv.values(), &rv, &mask)
            }
        };
        rows.push(ScalingRow { t, a, density_rel, fractional_rel, eta_rel });
    }
    Ok(ScalingReport { rows })
}

/// Grid sizing shared by the tail and mean-value sweeps.
#[derive(Debug, Clone, Copy)]
pub struct SweepGrid {
    /// Box length in units of a(t).
    pub box_factor: f64,
    pub n: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self { box_factor: 64.0, n: 1024 }
    }
}

struct Sweep {
    pi: SymbolInterpolant,
    mu: SymbolInterpolant,
    d: usize,
    grid: SweepGrid,
}

impl Sweep {
    fn new(pi: &LevyMeasure, mu: &LevyMeasure, grid: SweepGrid) -> Result<Self> {
        if pi.dim() != mu.dim() {
            return Err(Error::GridMismatch("pi and mu live in different dimensions".into()));
        }
        if !mu.is_symmetric() {
            return invalid("mu must be symmetric");
        }
        Ok(Self { pi: SymbolInterpolant::new(pi), mu: SymbolInterpolant::new(mu), d: pi.dim(), grid })
    }

    fn grid_for(&self, scale: f64) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.d, self.grid.n, self.grid.box_factor * scale)
    }

    /// Spectrum of L^{μ;δ} p^π(t, ·) on `g`.
    fn fractional_density(&self, g: &FrequencyGrid, t: f64, delta: f64) -> Result<Spectrum> {
        let p = SymbolTable::from_interpolant(&self.pi, g);
        let m = SymbolTable::from_interpolant(&self.mu, g);
        Ok(density_spectrum(&p, t, 0.0)?.mul_real(&m.fractional(delta)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub t: f64,
    pub k: u32,
    /// Cut radius c (0 = whole space).
    pub c: f64,
    pub lhs: f64,
    pub shape: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct TailReport {
    pub beta: f64,
    pub rows: Vec<TailRow>,
    /// sup ratio over rows with c > 0.
    pub tail_constant: f64,
    /// sup ratio over the whole-space rows.
    pub full_constant: f64,
}

/// Empirical constants in ∫_{|x|>c}|L^{μ;δ}D^k p^π(t,x)| dx ≤ C t^{−δ} a^{β−|k|} c^{−β}
/// and its whole-space version. `c_rel` lists cuts in units of a(t).
#[allow(clippy::too_many_arguments)]
pub fn tail_bounds_check(
    pi: &LevyMeasure,
    mu: &LevyMeasure,
    kappa: &ScalingTriple,
    delta: f64,
    k_orders: &[u32],
    beta: f64,
    t_grid: &[f64],
    c_rel: &[f64],
    grid: SweepGrid,
) -> Result<TailReport> {
    if !(delta > 0.0 && delta < 1.0) || !(beta >= 0.0) {
        return invalid(format!("need delta in (0,1) and beta >= 0 (delta = {delta}, beta = {beta})"));
    }
    if k_orders.iter().any(|&k| k > 2) {
        return invalid("derivative orders are limited to |k| <= 2");
    }
    let sw = Sweep::new(pi, mu, grid)?;
    let mut rows = Vec::new();
    for &t in t_grid {
        let a = kappa.a(t);
        let g = sw.grid_for(a)?;
        let base = sw.fractional_density(&g, t, delta)?;
        for &k in k_orders {
            let v = base.derivative(k).ifft();
            let full = v.lp_norm(1.0);
            let shape = t.powf(-delta) * a.powi(-(k as i32));
            rows.push(TailRow { t, k, c: 0.0, lhs: full, shape, ratio: full / shape });
            for &cr in c_rel {
                let c = cr * a;
                let outside: Vec<f64> =
                    (0..g.len()).map(|i| if g.norm_x(i) > c { v.values()[i] } else { 0.0 }).collect();
                let lhs = lp_norm(&outside, g.cell(), 1.0);
                let shape = t.powf(-delta) * a.powf(beta - k as f64) * c.powf(-beta);
                rows.push(TailRow { t, k, c, lhs, shape, ratio: lhs / shape });
            }
        }
    }
    let sup = |full: bool| rows.iter().filter(|r| (r.c == 0.0) == full).map(|r| r.ratio).fold(0.0, f64::max);
    Ok(TailReport { beta, tail_constant: sup(false), full_constant: sup(true), rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRow {
    pub t: f64,
    pub y: f64,
    pub lhs: f64,
    /// lhs / (|y| / (t^δ a(t))); NaN at y = 0.
    pub ratio: f64,
}

/// Spatial mean-value bound ∫|L^{μ;δ}p(t,x−y) − L^{μ;δ}p(t,x)|dx ≤ C|y|/(t^δ a(t)),
/// with shifts along the first axis given in units of a(t).
pub fn mvt_space_check(
    pi: &LevyMeasure,
    mu: &LevyMeasure,
    kappa: &ScalingTriple,
    delta: f64,
    t_grid: &[f64],
    y_rel: &[f64],
    grid: SweepGrid,
) -> Result<(Vec<ShiftRow>, f64)> {
    let sw = Sweep::new(pi, mu, grid)?;
    let mut rows = Vec::new();
    for &t in t_grid {
        let a = kappa.a(t);
        let g = sw.grid_for(a)?;
        let base = sw.fractional_density(&g, t, delta)?;
        let v = base.ifft();
        for &yr in y_rel {
            let y = yr * a;
            let lhs = base.shifted([y, 0.0]).ifft().sub(&v)?.lp_norm(1.0);
            let ratio = if y == 0.0 { f64::NAN } else { lhs / (y.abs() / (t.powf(delta) * a)) };
            rows.push(ShiftRow { t, y, lhs, ratio });
        }
    }
    let c = rows.iter().map(|r| r.ratio).filter(|r| !r.is_nan()).fold(0.0, f64::max);
    Ok((rows, c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeShiftRow {
    pub a: f64,
    pub s: f64,
    pub value: f64,
}

const MVT_DECADES: f64 = 4.0;
const MVT_NODES: usize = 48;

/// ∫_{2a}^∞ (∫|L^{μ;1/2}p(t−s,x) − L^{μ;1/2}p(t,x)|dx)² dt for |s| ≤ a,
/// with `s_frac` giving s/a. Gauss–Legendre in log t over four decades and
/// a power-law tail beyond.
pub fn mvt_time_check(
    pi: &LevyMeasure,
    mu: &LevyMeasure,
    kappa: &ScalingTriple,
    a_grid: &[f64],
    s_frac: &[f64],
    grid: SweepGrid,
) -> Result<(Vec<TimeShiftRow>, f64)> {
    if s_frac.iter().any(|s| s.abs() > 1.0) {
        return invalid("time shifts must satisfy |s| <= a");
    }
    let sw = Sweep::new(pi, mu, grid)?;
    let rule = GaussLegendre::new(MVT_NODES);
    let mut rows = Vec::new();
    for &a in a_grid {
        for &sf in s_frac {
            let s = sf * a;
            let integrand = |t: f64| -> Result<f64> {
                let g = sw.grid_for(kappa.a(t + a))?;
                let lhs = sw.fractional_density(&g, t - s, 0.5)?.ifft();
                let rhs = sw.fractional_density(&g, t, 0.5)?.ifft();
                Ok(lhs.sub(&rhs)?.lp_norm(1.0).powi(2))
            };
            let (lo, hi) = ((2.0 * a).ln(), (2.0 * a).ln() + MVT_DECADES * std::f64::consts::LN_10);
            let mut err = None;
            let body = rule.integrate(lo, hi, |u| {
                let t = u.exp();
                match integrand(t) {
                    Ok(v) => v * t,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            // Tail: t·I(t)² ~ t^{−γ} beyond the last node.
            let t1 = hi.exp();
            let (f1, f2) = (integrand(t1)? * t1, integrand(2.0 * t1)? * 2.0 * t1);
            let gamma_tail = (f1 / f2).ln() / std::f64::consts::LN_2;
            let tail = if f1 > 0.0 && gamma_tail > 0.0 { f1 / gamma_tail } else { 0.0 };
            rows.push(TimeShiftRow { a, s, value: body + tail });
        }
    }
    let c = rows.iter().map(|r| r.value).fold(0.0, f64::max);
    Ok((rows, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn cauchy_table(g: &FrequencyGrid) -> SymbolTable {
        SymbolTable::from_fn(g, |xi| Complex64::new(-2.0 * PI * PI * xi[0].abs(), 0.0))
    }

    #[test]
    fn c_delta_half() {
        assert!((c_delta(0.5) - 0.5 / PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn subordination_matches_spectral() {
        let g = FrequencyGrid::new(1, 256, 16.0).unwrap();
        let f = GridFunction::from_fn(&g, |x| (-PI * x[0] * x[0]).exp());
        let r = subordination_check(&cauchy_table(&g), 0.5, &f, 1.0).unwrap();
        assert!(r.sup_abs < 1e-3 && r.sup_rel < 1e-3, "{} {}", r.sup_abs, r.sup_rel);
        let zero = GridFunction::zeros(&g);
        let r = subordination_check(&cauchy_table(&g), 0.5, &zero, 1.0).unwrap();
        assert_eq!(r.sup_abs, 0.0);
    }

    #[test]
    fn cauchy_is_self_similar() {
        let pi = LevyMeasure::stable(1, 1.0).unwrap();
        let k = ScalingTriple::power(1.0).unwrap();
        let g = FrequencyGrid::new(1, 256, 32.0).unwrap();
        let r = scaling_identity_check(&pi, &k, &pi, None, 0.5, &[0.25, 1.0, 4.0], &g).unwrap();
        assert!(r.max_error() < 1e-6, "{:?}", r.rows);
    }

    #[test]
    fn zero_shift_is_zero() {
        let pi = LevyMeasure::stable(1, 1.0).unwrap();
        let k = ScalingTriple::power(1.0).unwrap();
        let (rows, _) = mvt_space_check(&pi, &pi, &k, 0.5, &[1.0], &[0.0], SweepGrid::default()).unwrap();
        assert_eq!(rows[0].lhs, 0.0);
    }
}
