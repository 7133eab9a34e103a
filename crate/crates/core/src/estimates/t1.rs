use num_complex::Complex64;
use rayon::prelude::*;

use super::{plancherel_p2, rho, EstimateReport};
use crate::error::{invalid, Result};
use crate::function_spaces::{besov_norm, h_norm, BesovWeight, Field, LPSystem};
use crate::jump_noise::{
    coefficient_norm_p, mean_se, sample_path_indexed, stochastic_integral, JumpPath, MarkSpace, Node, NodeKind, Smoothing,
    TimeField,
};
use crate::levy_measure::LevyMeasure;
use crate::quad::pairwise_sum;
use crate::solver::{solve, ProblemSpec};
use crate::spectral::{lp_norm, FrequencyGrid, GridFunction, SymbolTable};

/// A labelled problem of the ensemble (its λ is overridden by the sweep).
#[derive(Debug, Clone)]
pub struct T1Case {
    pub label: String,
    pub spec: ProblemSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct T1Config {
    pub p_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// λ values of the ρ_λ regression.
    pub slope_lambdas: Vec<f64>,
    /// Paths for rows with p ≤ 2.
    pub n_low: usize,
    /// Paths for rows with p > 2 (heavier tails of p-th moments).
    pub n_high: usize,
    pub seed: u64,
    /// Littlewood–Paley base for the Besov norms.
    pub base: u32,
    pub s: f64,
    /// Uniform nodes entering the time integrals (every `stride`-th).
    pub stride: usize,
    /// Threshold of the "violated" verdict.
    pub c_cap: f64,
}

impl Default for T1Config {
    fn default() -> Self {
        Self {
            p_grid: vec![1.5, 2.0, 3.0, 4.0],
            lambda_grid: vec![0.0, 1.0, 10.0],
            slope_lambdas: vec![10.0, 100.0],
            n_low: 2000,
            n_high: 8000,
            seed: 1,
            base: 2,
            s: 0.0,
            stride: 8,
            c_cap: 1e3,
        }
    }
}

impl T1Config {
    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() || self.p_grid.iter().any(|p| !(*p > 1.0 && p.is_finite())) {
            return invalid("p grid must be nonempty with every p > 1");
        }
        if self.lambda_grid.iter().chain(&self.slope_lambdas).any(|l| !(*l >= 0.0)) {
            return invalid("lambda values must be nonnegative");
        }
        if self.n_low < 2 || self.n_high < self.n_low || self.stride == 0 {
            return invalid("need n_high >= n_low >= 2 and a positive stride");
        }
        Ok(())
    }

    fn paths_for(&self, p: f64) -> usize {
        if p <= 2.0 { self.n_low } else { self.n_high }
    }
}

/// Log-log slope of |u| against λ, computed on the deterministic part R_λ f.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSlope {
    pub case: String,
    pub p: f64,
    pub lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct T1Report {
    pub rows: Vec<EstimateReport>,
    pub slopes: Vec<RhoSlope>,
}

impl T1Report {
    /// Largest relative difference of the empirical constants of two reports
    /// over the same rows (used for the input-scaling invariance).
    pub fn max_constant_gap(&self, other: &T1Report) -> Result<f64> {
        if self.rows.len() != other.rows.len() {
            return invalid("reports cover different rows");
        }
        Ok(self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                if a.constant == b.constant {
                    0.0
                } else {
                    (a.constant - b.constant).abs() / a.constant.abs().max(b.constant.abs())
                }
            })
            .fold(0.0, f64::max))
    }

    /// Largest empirical constant over the rows of one inequality.
    pub fn max_constant(&self, inequality: &str) -> f64 {
        self.rows.iter().filter(|r| r.inequality == inequality).map(|r| r.constant).fold(0.0, f64::max)
    }
}

/// Rerun `verify_t1` with every input multiplied by `c` and return the
/// largest relative change of an empirical constant.
pub fn scaling_invariance(cases: &[T1Case], cfg: &T1Config, base: &T1Report, c: f64) -> Result<f64> {
    let scaled: Vec<T1Case> =
        cases.iter().map(|k| T1Case { label: k.label.clone(), spec: k.spec.scaled_inputs(c) }).collect();
    base.max_constant_gap(&verify_t1(&scaled, cfg)?)
}

fn gaussian(grid: &FrequencyGrid, centre: f64, width: f64, amp: f64) -> GridFunction {
    GridFunction::from_fn(grid, |x| amp * (-std::f64::consts::PI * ((x[0] - centre) / width).powi(2)).exp())
}

/// The standard ensemble: stable π = μ with σ ∈ {0.5, 1, 1.5}, each with the
/// four data variants of [`t1_cases`], on a periodic grid of `n` points and
/// period `box_len`.
pub fn t1_ensemble(n: usize, box_len: f64, horizon: f64, steps: usize) -> Result<Vec<T1Case>> {
    let grid = FrequencyGrid::new(1, n, box_len)?;
    let mut cases = Vec::new();
    for sigma in [0.5, 1.0, 1.5] {
        let tab = SymbolTable::eval(&LevyMeasure::stable(1, sigma)?, &grid)?;
        cases.extend(t1_cases(&format!("stable{sigma}"), tab.clone(), tab, horizon, steps)?);
    }
    Ok(cases)
}

/// g-only, f-only, Φ-only and mixed problems for one pair of symbols. The
/// forcing is wide (scale 8) so that |ψ| ≪ λ on its spectrum for λ ≥ 10,
/// which the ρ_λ regression relies on; Φ has two marks of mass 1 and 2.
pub fn t1_cases(prefix: &str, pi: SymbolTable, mu: SymbolTable, horizon: f64, steps: usize) -> Result<Vec<T1Case>> {
    let grid = pi.grid().clone();
    let marks = MarkSpace::new(vec![1.0, 2.0])?;
    let g = gaussian(&grid, 0.0, 1.0, 1.0);
    let f_grid = grid.clone();
    let f = TimeField::from_fn(&grid, 1, move |t| {
        vec![gaussian(&f_grid, 0.0, 8.0, 1.0 + 0.5 * (2.0 * std::f64::consts::PI * t).sin())]
    });
    let phi = TimeField::constant(&Field::new(
        marks.value_space(2.0)?,
        vec![gaussian(&grid, 0.0, 1.0, 1.0), gaussian(&grid, 1.0, 0.7, 0.5)],
    )?);
    let base = ProblemSpec::from_tables(pi, mu, 0.0, horizon)?.with_steps(steps);
    let variants = [
        ("g", base.clone().with_g(g.clone())),
        ("f", base.clone().with_f(f.clone())),
        ("phi", base.clone().with_noise(phi.clone(), marks.clone())),
        ("mixed", base.with_g(g).with_f(f).with_noise(phi, marks)),
    ];
    Ok(variants.into_iter().map(|(name, spec)| T1Case { label: format!("{prefix}-{name}"), spec }).collect())
}

/// (∫₀^T n(t) dt) by the trapezoid rule on `steps` uniform steps, exact for
/// time-constant fields.
fn time_integral(constant: bool, horizon: f64, steps: usize, n: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    if constant {
        return Ok(horizon * n(0.0)?);
    }
    let h = horizon / steps as f64;
    let vals: Vec<f64> = (0..=steps)
        .map(|k| n(k as f64 * h).map(|v| if k == 0 || k == steps { 0.5 * h * v } else { h * v }))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&vals))
}

/// (∫₀^T |Φ(t)|^p_{B^s_{pp}(V_p)} dt)^{1/p}.
#[allow(clippy::too_many_arguments)]
fn besov_time_norm(
    phi: &TimeField,
    marks: &MarkSpace,
    sys: &LPSystem,
    mu: &SymbolTable,
    s: f64,
    p: f64,
    horizon: f64,
    steps: usize,
) -> Result<f64> {
    if marks.is_empty() || phi.is_zero() {
        return Ok(0.0);
    }
    let space = marks.value_space(p)?;
    let v = time_integral(phi.is_constant(), horizon, steps, |t| {
        Ok(besov_norm(&phi.field_at(t, &space)?, sys, BesovWeight::Bessel(mu), s, p, p)?.value.powf(p))
    })?;
    Ok(v.powf(1.0 / p))
}

/// (∫₀^T |m(D)Φ(t)|^p_{L_p(V_r)} dt)^{1/p}.
#[allow(clippy::too_many_arguments)]
fn multiplier_time_norm(
    phi: &TimeField,
    marks: &MarkSpace,
    m: &[f64],
    p: f64,
    r: f64,
    horizon: f64,
    steps: usize,
) -> Result<f64> {
    if marks.is_empty() || phi.is_zero() {
        return Ok(0.0);
    }
    let space = marks.value_space(r)?;
    let v = time_integral(phi.is_constant(), horizon, steps, |t| Ok(phi.field_at(t, &space)?.map_multiplier(m).lp_norm(p).powf(p)))?;
    Ok(v.powf(1.0 / p))
}

fn h_time_norm(phi: &TimeField, marks: &MarkSpace, mu: &SymbolTable, s: f64, p: f64, r: f64, horizon: f64, steps: usize) -> Result<f64> {
    if marks.is_empty() || phi.is_zero() {
        return Ok(0.0);
    }
    Ok(coefficient_norm_p(phi, marks, mu, s, p, r, horizon, steps)?.powf(1.0 / p))
}

fn empty_path(horizon: f64) -> JumpPath {
    JumpPath { horizon, seed: 0, stream: 0, events: Vec::new() }
}

fn kept(stride: usize, steps: usize) -> impl Fn(&Node) -> bool {
    move |n: &Node| matches!(n.kind, NodeKind::Uniform(k) if k % stride == 0 || k == steps)
}

/// Trapezoid integrals ∫|m_i(D)u|^p dt over the kept nodes, for each
/// multiplier i and each p, given the spectra at those nodes.
struct NormAccumulator<'a> {
    grid: &'a FrequencyGrid,
    multipliers: &'a [Vec<Complex64>],
    ps: &'a [f64],
}

impl NormAccumulator<'_> {
    fn integrals(&self, times: &[f64], spectra: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
        let cell = self.grid.cell();
        let per_node: Vec<Vec<Vec<f64>>> = spectra
            .iter()
            .map(|s| {
                self.multipliers
                    .iter()
                    .map(|m| {
                        let mut buf: Vec<Complex64> = s.iter().zip(m).map(|(a, b)| a * b).collect();
                        self.grid.inverse(&mut buf);
                        let re: Vec<f64> = buf.iter().map(|v| v.re).collect();
                        self.ps.iter().map(|&p| lp_norm(&re, cell, p).powf(p)).collect()
                    })
                    .collect()
            })
            .collect();
        (0..self.multipliers.len())
            .map(|i| {
                (0..self.ps.len())
                    .map(|j| {
                        let terms: Vec<f64> = times
                            .windows(2)
                            .enumerate()
                            .map(|(k, w)| 0.5 * (w[1] - w[0]) * (per_node[k][i][j] + per_node[k + 1][i][j]))
                            .collect();
                        pairwise_sum(&terms)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Per-path time integrals for the given multipliers: out[path][i][j] is
/// ∫|m_i(D)u|^{p_j} dt with u = deterministic part + R̃_λΦ along path `path`.
#[allow(clippy::too_many_arguments)]
fn path_integrals(
    spec: &ProblemSpec,
    deterministic: &[Vec<Complex64>],
    times: &[f64],
    multipliers: &[Vec<Complex64>],
    ps: &[f64],
    n_paths: usize,
    seed: u64,
    stride: usize,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let acc = NormAccumulator { grid: spec.grid(), multipliers, ps };
    let noisy = !spec.marks.is_empty() && !spec.phi.is_zero();
    if !noisy {
        return Ok(vec![acc.integrals(times, deterministic)]);
    }
    let keep = kept(stride, spec.steps);
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_path_indexed(&spec.marks, spec.horizon, seed, i)?;
            let noise = stochastic_integral(&spec.phi, &spec.marks, &path, spec.lambda, Smoothing::Semigroup(&spec.pi), spec.steps, &keep)?;
            let total: Vec<Vec<Complex64>> = (0..noise.len())
                .map(|k| noise.spectral_values(k).iter().zip(&deterministic[k]).map(|(a, b)| a + b).collect())
                .collect();
            Ok(acc.integrals(times, &total))
        })
        .collect()
}

/// Deterministic part (T^λ g + R_λ f) at the kept uniform nodes.
fn deterministic_part(spec: &ProblemSpec, stride: usize) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let mut det = spec.clone();
    det.marks = MarkSpace::new(vec![])?;
    det.phi = TimeField::zero(spec.grid(), 0);
    let sol = solve(&det, &empty_path(spec.horizon))?;
    let keep = kept(stride, spec.steps);
    let mut times = Vec::new();
    let mut spectra = Vec::new();
    for (k, node) in sol.nodes().iter().enumerate() {
        if keep(node) {
            times.push(node.t);
            spectra.push(sol.total.spectral_values(k).to_vec());
        }
    }
    Ok((times, spectra))
}

/// (mean^{1/p}, its delta-method standard error) of per-path p-th powers.
fn root_mean(samples: &[f64], p: f64) -> (f64, f64) {
    let (m, se) = mean_se(samples);
    if m <= 0.0 {
        return (0.0, 0.0);
    }
    let v = m.powf(1.0 / p);
    (v, v * se / (p * m))
}

/// Monte Carlo check of both solution estimates over cases × p × λ, plus
/// the ρ_λ regression of |u| on the deterministic forcing part.
///
/// Rows "Lu": |L^μ u|_{H_p^s(E)} ≤ C[|f|_{H_p^s(E)} + |g|_{B_pp^{s+1−1/p}} +
/// |Φ|_{B_{p,pp}^{s+1−1/p}(E)} + |Φ|_{H_{2,p}^{s+1/2}(E)}];
/// rows "u": |u|_{H_p^s(E)} ≤ C[ρ|f| + ρ^{1/p}|g|_{H_p^s} + ρ^{1/p}|Φ|_{H_{p,p}^s}
/// + ρ^{1/2}|Φ|_{H_{2,p}^s}]. The H_{2,p} terms are dropped for p < 2.
pub fn verify_t1(cases: &[T1Case], cfg: &T1Config) -> Result<T1Report> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let n_max = cfg.p_grid.iter().map(|&p| cfg.paths_for(p)).max().unwrap_or(cfg.n_low);
    for case in cases {
        let spec0 = &case.spec;
        spec0.validate()?;
        let grid = spec0.grid();
        let sys = LPSystem::new(cfg.base, grid)?;
        let bessel = spec0.mu.bessel(cfg.s);
        let m_u: Vec<Complex64> = bessel.iter().map(|b| Complex64::new(*b, 0.0)).collect();
        let m_lu: Vec<Complex64> = bessel.iter().zip(spec0.mu.values()).map(|(b, m)| m * b).collect();
        let multipliers = [m_u.clone(), m_lu];
        let unit = MarkSpace::new(vec![1.0])?;
        let (t, steps, s) = (spec0.horizon, spec0.steps, cfg.s);
        for &lambda in &cfg.lambda_grid {
            let mut spec = spec0.clone();
            spec.lambda = lambda;
            let (times, det) = deterministic_part(&spec, cfg.stride)?;
            let per_path = path_integrals(&spec, &det, &times, &multipliers, &cfg.p_grid, n_max, cfg.seed, cfg.stride)?;
            let r = rho(lambda, t);
            for (j, &p) in cfg.p_grid.iter().enumerate() {
                let n = cfg.paths_for(p).min(per_path.len());
                let take = |i: usize| -> Vec<f64> { per_path[..n].iter().map(|v| v[i][j]).collect() };
                let u = root_mean(&take(0), p);
                let lu = root_mean(&take(1), p);
                let f_n = h_time_norm(&spec.f, &unit, &spec.mu, s, p, p, t, steps)?;
                let g_h = h_norm(&Field::scalar(spec.g.clone()), &spec.mu, s, p)?.value;
                let g_b = besov_norm(&Field::scalar(spec.g.clone()), &sys, BesovWeight::Bessel(&spec.mu), s + 1.0 - 1.0 / p, p, p)?.value;
                let phi_b = besov_time_norm(&spec.phi, &spec.marks, &sys, &spec.mu, s + 1.0 - 1.0 / p, p, t, steps)?;
                let phi_hp = h_time_norm(&spec.phi, &spec.marks, &spec.mu, s, p, p, t, steps)?;
                let (phi_h2_half, phi_h2) = if p >= 2.0 {
                    (
                        h_time_norm(&spec.phi, &spec.marks, &spec.mu, s + 0.5, p, 2.0, t, steps)?,
                        h_time_norm(&spec.phi, &spec.marks, &spec.mu, s, p, 2.0, t, steps)?,
                    )
                } else {
                    (0.0, 0.0)
                };
                let rhs_lu = f_n + g_b + phi_b + phi_h2_half;
                let rhs_u = r * f_n + r.powf(1.0 / p) * (g_h + phi_hp) + r.sqrt() * phi_h2;
                let paths = if per_path.len() > 1 { n } else { 1 };
                rows.push(EstimateReport::new("Lu", &case.label, p, s, lambda, lu, rhs_lu, paths, cfg.c_cap));
                rows.push(EstimateReport::new("u", &case.label, p, s, lambda, u, rhs_u, paths, cfg.c_cap));
            }
        }
        if !spec0.f.is_zero() && cfg.slope_lambdas.len() >= 2 {
            let mut norms = vec![Vec::new(); cfg.p_grid.len()];
            for &lambda in &cfg.slope_lambdas {
                let mut spec = spec0.clone();
                spec.lambda = lambda;
                spec.g = GridFunction::zeros(grid);
                let (times, det) = deterministic_part(&spec, cfg.stride)?;
                let acc = NormAccumulator { grid, multipliers: std::slice::from_ref(&m_u), ps: &cfg.p_grid };
                let ints = acc.integrals(&times, &det);
                for (j, &p) in cfg.p_grid.iter().enumerate() {
                    norms[j].push(ints[0][j].powf(1.0 / p));
                }
            }
            let x: Vec<f64> = cfg.slope_lambdas.iter().map(|l| l.ln()).collect();
            for (j, &p) in cfg.p_grid.iter().enumerate() {
                let y: Vec<f64> = norms[j].iter().map(|v| v.ln()).collect();
                slopes.push(RhoSlope {
                    case: case.label.clone(),
                    p,
                    lambdas: cfg.slope_lambdas.clone(),
                    norms: norms[j].clone(),
                    slope: crate::quad::fit_slope(&x, &y),
                });
            }
        }
    }
    Ok(T1Report { rows, slopes })
}

/// Coefficient-only problem for the kernel estimate of the stochastic
/// convolution u = R̃_λΦ.
#[derive(Debug, Clone)]
pub struct SmoothCase {
    pub label: String,
    pub pi: SymbolTable,
    pub mu: SymbolTable,
    pub phi: TimeField,
    pub marks: MarkSpace,
    pub lambda: f64,
    pub horizon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothEstimateReport {
    pub rows: Vec<EstimateReport>,
    /// Monte Carlo E∫₀^T|L^{μ;1/2}u|²_{L₂} dt per case, with standard error.
    pub p2_mc: Vec<(f64, f64)>,
    /// The same quantity from the Plancherel computation (no Monte Carlo).
    pub p2_plancherel: Vec<f64>,
}

impl SmoothEstimateReport {
    /// Largest |MC − Plancherel| in standard errors.
    pub fn max_z(&self) -> f64 {
        self.p2_mc
            .iter()
            .zip(&self.p2_plancherel)
            .map(|((m, se), i)| if *se > 0.0 { (m - i).abs() / se } else if m == i { 0.0 } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }
}

/// |L^μ u|_{𝕃_p(E)} ≤ C(|L^{μ;1/2}Φ|_{𝕃_{2,p}(E)} + |Φ|_{𝔹^{1−1/p}_{p,pp}(E)}) for
/// the stochastic convolution; rows with p < 2 keep only the Besov term.
pub fn verify_smooth_estimate(cases: &[SmoothCase], cfg: &T1Config) -> Result<SmoothEstimateReport> {
    cfg.validate()?;
    let n_max = cfg.p_grid.iter().map(|&p| cfg.paths_for(p)).max().unwrap_or(cfg.n_low);
    let mut rows = Vec::new();
    let mut p2_mc = Vec::new();
    let mut p2_plancherel = Vec::new();
    let mut ps = cfg.p_grid.clone();
    ps.push(2.0);
    let two = ps.len() - 1;
    for case in cases {
        let spec = ProblemSpec::from_tables(case.pi.clone(), case.mu.clone(), case.lambda, case.horizon)?
            .with_steps(case.steps)
            .with_noise(case.phi.clone(), case.marks.clone());
        let grid = spec.grid();
        let sys = LPSystem::new(cfg.base, grid)?;
        let half = case.mu.fractional(0.5);
        let m_lu: Vec<Complex64> = case.mu.values().to_vec();
        let m_half: Vec<Complex64> = half.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let h = case.horizon / case.steps as f64;
        let times: Vec<f64> = (0..=case.steps)
            .filter(|k| k % cfg.stride == 0 || *k == case.steps)
            .map(|k| if k == case.steps { case.horizon } else { k as f64 * h })
            .collect();
        let zero = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; times.len()];
        let per_path = path_integrals(&spec, &zero, &times, &[m_lu, m_half], &ps, n_max, cfg.seed, cfg.stride)?;
        for (j, &p) in cfg.p_grid.iter().enumerate() {
            let n = cfg.paths_for(p).min(per_path.len());
            let lhs = root_mean(&per_path[..n].iter().map(|v| v[0][j]).collect::<Vec<_>>(), p);
            let besov = besov_time_norm(&case.phi, &case.marks, &sys, &case.mu, 1.0 - 1.0 / p, p, case.horizon, case.steps)?;
            let kernel = if p >= 2.0 {
                multiplier_time_norm(&case.phi, &case.marks, &half, p, 2.0, case.horizon, case.steps)?
            } else {
                0.0
            };
            let paths = if per_path.len() > 1 { n } else { 1 };
            rows.push(EstimateReport::new("smooth", &case.label, p, 0.0, case.lambda, lhs, besov + kernel, paths, cfg.c_cap));
        }
        let n = cfg.n_low.min(per_path.len());
        p2_mc.push(mean_se(&per_path[..n].iter().map(|v| v[1][two]).collect::<Vec<_>>()));
        let pl = plancherel_p2(&case.pi, &case.mu, &case.phi, &case.marks, case.lambda, case.horizon, 0.0, case.steps)?;
        p2_plancherel.push(pl.integral);
    }
    Ok(SmoothEstimateReport { rows, p2_mc, p2_plancherel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::Verdict;

    fn small_cfg() -> T1Config {
        T1Config { p_grid: vec![1.5, 2.0, 4.0], lambda_grid: vec![0.0, 10.0], n_low: 200, n_high: 400, ..T1Config::default() }
    }

    fn cauchy_cases(kinds: &[&str]) -> Vec<T1Case> {
        t1_ensemble(256, 16.0, 1.0, 128)
            .unwrap()
            .into_iter()
            .filter(|c| c.label.starts_with("stable1-") && kinds.iter().any(|k| c.label.ends_with(k)))
            .collect()
    }

    #[test]
    fn ensemble_has_twelve_cases() {
        let cases = t1_ensemble(256, 16.0, 1.0, 64).unwrap();
        assert_eq!(cases.len(), 12);
    }

    #[test]
    fn deterministic_rows_are_bounded_and_scale_free() {
        let cases = cauchy_cases(&["-g", "-f"]);
        let cfg = small_cfg();
        let rep = verify_t1(&cases, &cfg).unwrap();
        assert_eq!(rep.rows.len(), 2 * 2 * 3 * 2);
        assert!(rep.rows.iter().all(|r| r.constant.is_finite() && r.verdict == Verdict::Bounded && r.n_paths == 1));
        let gap = scaling_invariance(&cases, &cfg, &rep, 7.0).unwrap();
        assert!(gap < 1e-10, "{gap}");
    }

    #[test]
    fn noisy_rows_use_the_requested_paths() {
        let cases = cauchy_cases(&["-phi"]);
        let rep = verify_t1(&cases, &small_cfg()).unwrap();
        let r4 = rep.rows.iter().find(|r| r.p == 4.0).unwrap();
        let r2 = rep.rows.iter().find(|r| r.p == 2.0).unwrap();
        assert_eq!((r2.n_paths, r4.n_paths), (200, 400));
        assert!(rep.rows.iter().all(|r| r.constant.is_finite() && r.lhs > 0.0));
    }

    #[test]
    fn smooth_estimate_matches_plancherel_at_p2() {
        let grid = FrequencyGrid::new(1, 256, 16.0).unwrap();
        let tab = SymbolTable::eval(&LevyMeasure::stable(1, 1.0).unwrap(), &grid).unwrap();
        let marks = MarkSpace::new(vec![1.5]).unwrap();
        let phi = TimeField::constant(&Field::new(marks.value_space(2.0).unwrap(), vec![gaussian(&grid, 0.0, 1.0, 1.0)]).unwrap());
        let case = SmoothCase { label: "cauchy".into(), pi: tab.clone(), mu: tab, phi, marks, lambda: 1.0, horizon: 1.0, steps: 128 };
        let cfg = T1Config { n_low: 2000, n_high: 2000, ..small_cfg() };
        let rep = verify_smooth_estimate(&[case], &cfg).unwrap();
        assert!(rep.max_z() < 4.0, "{rep:?}");
        assert!(rep.rows.iter().all(|r| r.constant.is_finite() && r.constant > 0.0));
    }
}
