//! The verification suites driven by the CLI. Each produces one table and a
//! verdict; nothing here depends on the worker count.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::config::{BaseSetting, ExperimentConfig, Family, KernelKind, ScalingKind};
use super::output::{Cell, Table};
use crate::cz::{cz_ensemble, spectral_kernel, verify_stoch_hormander_lp, SpaceTimeGrid};
use crate::error::{Error, Result};
use crate::estimates::{
    hormander_sweep, t1_cases, verify_t1, EstimateReport, HormanderSetup, T1Case, T1Config, Verdict,
};
use crate::function_spaces::{besov_norm, default_base, h_norm, BesovWeight, Field, LPSystem};
use crate::jump_noise::{ito_isometry_check, sample_path, MarkSpace, TimeField};
use crate::levy_measure::{
    check_assumptions, AlphaPair, BernsteinFamily, BernsteinKernel, LevyMeasure, Mu0Certificate,
};
use crate::quad::logspace;
use crate::scaling::ScalingTriple;
use crate::solver::{residual_order, ProblemSpec};
use crate::spectral::{density, FrequencyGrid, GridFunction, SymbolTable};

/// One catalogue entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteInfo {
    pub id: &'static str,
    pub description: &'static str,
    /// The mathematical statements the suite exercises.
    pub anchors: &'static str,
}

pub const SUITES: &[SuiteInfo] = &[
    SuiteInfo {
        id: "symbols",
        description: "symbol psi of the Levy measure on the frequency grid, with the closed form for stable measures in d = 1",
        anchors: "symbol formula of L^pi; Fourier multiplier of the generator",
    },
    SuiteInfo {
        id: "densities",
        description: "transition densities p(t, x) by Fourier inversion, with mass and positivity",
        anchors: "transition density of Z^pi; heat-kernel scaling identity",
    },
    SuiteInfo {
        id: "spaces",
        description: "Littlewood-Paley partition, H and Besov norms of a test function",
        anchors: "Littlewood-Paley partition of unity; Bessel-potential and Besov norms of generalized smoothness",
    },
    SuiteInfo {
        id: "noise",
        description: "Ito isometry of the compensated Poisson stochastic integral",
        anchors: "Ito isometry for the martingale measure q",
    },
    SuiteInfo {
        id: "solver",
        description: "mild solution on the event-adapted grid and the order of the integral-form residual",
        anchors: "mild solution u = T g + R f + R~ Phi; integral form of the equation",
    },
    SuiteInfo {
        id: "t1",
        description: "Monte Carlo empirical constants of the a priori estimates and the rho_lambda decay",
        anchors: "main existence-and-estimate theorem (both p-regimes); assumptions D and B",
    },
    SuiteInfo {
        id: "hormander",
        description: "stochastic Hormander integral of the kernel over a delta sweep, and the L_p bound of the square function",
        anchors: "Hormander condition for the stochastic kernel; L_p boundedness of the square-function operator G",
    },
    SuiteInfo {
        id: "cz",
        description: "maximal and sharp functions, Calderon-Zygmund decomposition, weak (1,1) and Fefferman-Stein constants",
        anchors: "Calderon-Zygmund (Whitney) decomposition; Fefferman-Stein inequality; weak (1,1) maximal bound",
    },
];

fn distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1];
        for (j, cb) in b.iter().enumerate() {
            cur.push((prev[j] + usize::from(ca != *cb)).min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Suite ids ordered by edit distance to `query`.
pub fn suggest(query: &str) -> Vec<&'static str> {
    let mut ids: Vec<(usize, &'static str)> = SUITES.iter().map(|s| (distance(query, s.id), s.id)).collect();
    ids.sort();
    ids.into_iter().map(|(_, id)| id).collect()
}

pub fn find_suite(id: &str) -> Option<&'static SuiteInfo> {
    SUITES.iter().find(|s| s.id == id)
}

/// Overall verdict of a suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Underpowered,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Underpowered => "underpowered",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok { Outcome::Pass } else { Outcome::Fail }
    }
}

pub struct SuiteResult {
    pub tables: Vec<(String, Table)>,
    pub outcome: Outcome,
    pub detail: String,
}

/// Measure, scaling and grid resolved from a config.
pub struct Stack {
    pub pi: LevyMeasure,
    pub kappa: ScalingTriple,
    /// κ of the measure itself, which certifies the μ⁰ floor.
    pub natural: ScalingTriple,
    /// Order of the large jumps (σ for stable measures).
    pub large_order: f64,
    pub grid: FrequencyGrid,
    pub base: u32,
}

impl Stack {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let m = &cfg.measure;
        let d = cfg.grid.d;
        let (pi, natural, large_order) = match m.family {
            Family::Stable => {
                (LevyMeasure::stable_with_angles(d, m.sigma, m.angles)?, ScalingTriple::power(m.sigma)?, m.sigma)
            }
            Family::Bernstein => {
                let family = match m.kernel {
                    KernelKind::PowerSum => BernsteinFamily::PowerSum(m.exponents.clone()),
                    KernelKind::LogPower => BernsteinFamily::LogPower { alpha: m.alpha, beta: m.beta },
                };
                let kernel = BernsteinKernel::new(family, d)?;
                (LevyMeasure::bernstein(&kernel, m.angles, None)?, kernel.scaling()?, kernel.large_scale_order())
            }
        };
        let kappa = match cfg.scaling.kind {
            ScalingKind::Natural => natural.clone(),
            ScalingKind::Power => ScalingTriple::power(cfg.scaling.exponent)?,
        };
        let grid = FrequencyGrid::new(d, cfg.grid.n, cfg.grid.box_len)?;
        let base = match cfg.spaces.base {
            BaseSetting::Fixed(b) => b,
            BaseSetting::Named(_) => default_base(|e| kappa.l(e)).ok_or_else(|| Error::Config {
                field: "spaces.base".into(),
                message: "no N <= 1024 with l(1/N) < 1; set the base explicitly".into(),
            })?,
        };
        Ok(Self { pi, kappa, natural, large_order, grid, base })
    }

    fn table(&self) -> Result<SymbolTable> {
        SymbolTable::eval(&self.pi, &self.grid)
    }
}

/// Closed-form symbol −c_σ|2πξ|^σ of the d = 1 stable measure |y|^{−1−σ}dy.
pub fn stable_symbol_1d(sigma: f64, xi: f64) -> f64 {
    let c = if (sigma - 1.0).abs() < 1e-15 { PI } else { -2.0 * gamma(-sigma) * (PI * sigma / 2.0).cos() };
    -c * (2.0 * PI * xi.abs()).powf(sigma)
}

fn gaussian(grid: &FrequencyGrid, width: f64) -> GridFunction {
    GridFunction::from_fn(grid, |x| (-PI * (x[0] * x[0] + x[1] * x[1]) / (width * width)).exp())
}

pub fn run_suite(id: &str, cfg: &ExperimentConfig) -> Result<SuiteResult> {
    match id {
        "symbols" => symbols(cfg),
        "densities" => densities(cfg),
        "spaces" => spaces(cfg),
        "noise" => noise(cfg),
        "solver" => solver(cfg),
        "t1" => t1(cfg),
        "hormander" => hormander(cfg),
        "cz" => cz(cfg),
        other => Err(Error::Config {
            field: "suites".into(),
            message: format!("unknown suite '{other}'; did you mean: {}", suggest(other).join(", ")),
        }),
    }
}

fn one(name: &str, table: Table, outcome: Outcome, detail: String) -> SuiteResult {
    SuiteResult { tables: vec![(name.to_string(), table)], outcome, detail }
}

fn symbols(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let st = Stack::build(cfg)?;
    let tab = st.table()?;
    tab.check_invariants()?;
    let oracle = cfg.measure.family == Family::Stable && cfg.grid.d == 1;
    let mut t = Table::new(&["xi0", "xi1", "re_psi", "im_psi", "oracle"]);
    let mut worst: f64 = 0.0;
    for (i, v) in tab.values().iter().enumerate() {
        let xi = st.grid.xi(i);
        let o = if oracle { stable_symbol_1d(cfg.measure.sigma, xi[0]) } else { f64::NAN };
        if oracle && o != 0.0 {
            worst = worst.max(((v.re - o) / o).abs());
        }
        t.push(vec![Cell::Num(xi[0]), Cell::Num(xi[1]), Cell::Num(v.re), Cell::Num(v.im), Cell::Num(o)]);
    }
    let ok = !oracle || worst < 1e-6;
    let detail = if oracle { format!("max relative error vs closed form {worst:.3e}") } else { "invariants hold".into() };
    Ok(one("symbols", t, Outcome::from_bool(ok), detail))
}

fn densities(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let st = Stack::build(cfg)?;
    let tab = st.table()?;
    let mut t = Table::new(&["t", "x0", "x1", "density"]);
    let mut mass_err: f64 = 0.0;
    let mut min: f64 = 0.0;
    for time in [0.5, 1.0, 2.0] {
        let p = density(&tab, time, 0.0)?;
        mass_err = mass_err.max((p.integral() - 1.0).abs());
        let sup = p.sup_norm();
        min = min.min(p.values().iter().cloned().fold(0.0, f64::min) / sup);
        for (i, v) in p.values().iter().enumerate() {
            let x = st.grid.x(i);
            t.push(vec![Cell::Num(time), Cell::Num(x[0]), Cell::Num(x[1]), Cell::Num(*v)]);
        }
    }
    let ok = mass_err < 1e-8;
    Ok(one("densities", t, Outcome::from_bool(ok), format!("mass error {mass_err:.3e}, most negative value {min:.3e} of sup")))
}

fn spaces(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let st = Stack::build(cfg)?;
    let tab = st.table()?;
    let sys = LPSystem::new(st.base, &st.grid)?;
    let f = gaussian(&st.grid, 1.0);
    let residual = sys.partition_residual();
    let recon = sys.reconstruction_error(&f)?;
    let field = Field::scalar(f);
    let mut t = Table::new(&["norm", "p", "s", "value"]);
    for &p in &cfg.spaces.p {
        for &s in &cfg.spaces.s {
            t.push(vec![Cell::text("H"), Cell::Num(p), Cell::Num(s), Cell::Num(h_norm(&field, &tab, s, p)?.value)]);
            let b = besov_norm(&field, &sys, BesovWeight::Bessel(&tab), s, p, p)?.value;
            t.push(vec![Cell::text("B_pp"), Cell::Num(p), Cell::Num(s), Cell::Num(b)]);
            let bk = besov_norm(&field, &sys, BesovWeight::Kappa(&st.kappa), s, p, p)?.value;
            t.push(vec![Cell::text("B_pp_kappa"), Cell::Num(p), Cell::Num(s), Cell::Num(bk)]);
        }
    }
    let ok = residual < 1e-12 && recon < 1e-10;
    Ok(one(
        "spaces",
        t,
        Outcome::from_bool(ok),
        format!("base {} partition residual {residual:.3e}, reconstruction error {recon:.3e}", st.base),
    ))
}

fn noise(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let st = Stack::build(cfg)?;
    let marks = MarkSpace::new(vec![1.5])?;
    let h = Field::new(marks.value_space(2.0)?, vec![gaussian(&st.grid, 1.0)])?;
    let r = ito_isometry_check(&h, &marks, cfg.problem.horizon, cfg.ensemble.isometry, cfg.seed, cfg.problem.steps)?;
    let mut t = Table::new(&["n_paths", "mean", "std_error", "exact", "z_score"]);
    t.push(vec![Cell::Int(r.n_paths as i64), Cell::Num(r.mean), Cell::Num(r.std_error), Cell::Num(r.exact), Cell::Num(r.z_score)]);
    Ok(one("noise", t, Outcome::from_bool(r.z_score.abs() < 3.0), format!("z = {:.3}", r.z_score)))
}

/// Mixed g/f/Φ benchmark on the configured measure.
pub fn mixed_benchmark(pi: SymbolTable, horizon: f64) -> Result<ProblemSpec> {
    let grid = pi.grid().clone();
    let marks = MarkSpace::new(vec![2.0])?;
    let g = gaussian(&grid, 1.0);
    let fg = grid.clone();
    let f = TimeField::from_fn(&grid, 1, move |t| vec![gaussian(&fg, 1.5).scaled(1.0 + 0.5 * (2.0 * PI * t).sin())]);
    let phi = TimeField::constant(&Field::new(marks.value_space(2.0)?, vec![gaussian(&grid, 0.8).scaled(0.5)])?);
    Ok(ProblemSpec::from_tables(pi.clone(), pi, 1.0, horizon)?.with_g(g).with_f(f).with_noise(phi, marks))
}

fn solver(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let st = Stack::build(cfg)?;
    let spec = mixed_benchmark(st.table()?, cfg.problem.horizon)?;
    let path = sample_path(&spec.marks, spec.horizon, cfg.seed)?;
    let r = residual_order(&spec, &path, &cfg.problem.order_steps)?;
    let mut t = Table::new(&["steps", "residual"]);
    for (s, v) in r.steps.iter().zip(&r.residuals) {
        t.push(vec![Cell::Int(*s as i64), Cell::Num(*v)]);
    }
    Ok(one(
        "solver",
        t,
        Outcome::from_bool(r.order >= 1.8),
        format!("fitted order {:.3} over {} jumps", r.order, path.events.len()),
    ))
}

/// Check D and B for the configured measure and scaling; any failure is a
/// suite prerequisite error naming the failing condition. Unless given, the
/// μ⁰ constant is certified under the measure's own scaling, so a wrong κ
/// cannot shrink the floor until it is dominated trivially.
pub fn t1_prerequisites(cfg: &ExperimentConfig, st: &Stack) -> Result<()> {
    let sigma = st.pi.sigma();
    let (a1, a2) = cfg.assumptions.alphas(sigma, st.large_order);
    let r_grid = logspace(cfg.assumptions.r_min, cfg.assumptions.r_max, cfg.assumptions.r_count);
    let beta = if cfg.assumptions.mu0_beta < 0.0 { sigma } else { cfg.assumptions.mu0_beta };
    let check = || -> Result<()> {
        let c = if cfg.assumptions.mu0_c > 0.0 {
            cfg.assumptions.mu0_c
        } else {
            Mu0Certificate::largest_power_constant(&st.pi, &st.natural, beta, &r_grid)?
        };
        let mu0 = Mu0Certificate::power_law(&st.pi, beta, c)?;
        check_assumptions(&st.pi, &st.kappa, &mu0, AlphaPair { alpha1: a1, alpha2: a2 }, &r_grid)?;
        Ok(())
    };
    check().map_err(|e| Error::SuitePrereq { suite: "t1".into(), cause: format!("{}: {e}", e.kind()) })
}

fn verdict_outcome<'a>(rows: impl Iterator<Item = &'a EstimateReport>) -> Outcome {
    let mut out = Outcome::Pass;
    for r in rows {
        match r.verdict {
            Verdict::Violated => return Outcome::Fail,
            Verdict::Underpowered => out = Outcome::Underpowered,
            Verdict::Bounded if !r.constant.is_finite() => return Outcome::Fail,
            Verdict::Bounded => {}
        }
    }
    out
}

fn t1(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let st = Stack::build(cfg)?;
    t1_prerequisites(cfg, &st)?;
    let tab = st.table()?;
    let cases: Vec<T1Case> = t1_cases(st.pi.label(), tab.clone(), tab, cfg.problem.horizon, cfg.problem.steps)?;
    let tc = T1Config {
        p_grid: cfg.spaces.p.clone(),
        lambda_grid: cfg.problem.lambda.clone(),
        slope_lambdas: cfg.problem.slope_lambda.clone(),
        n_low: cfg.ensemble.n_low,
        n_high: cfg.ensemble.n_high,
        seed: cfg.seed,
        base: st.base,
        s: cfg.spaces.s.first().copied().unwrap_or(0.0),
        stride: cfg.problem.stride,
        c_cap: cfg.ensemble.c_cap,
    };
    let rep = verify_t1(&cases, &tc)?;
    let mut t = Table::new(&[
        "inequality", "case", "p", "s", "lambda", "lhs", "lhs_err", "rhs", "constant", "n_paths", "verdict",
    ]);
    for r in &rep.rows {
        t.push(vec![
            Cell::text(r.inequality),
            Cell::text(&r.case),
            Cell::Num(r.p),
            Cell::Num(r.s),
            Cell::Num(r.lambda),
            Cell::Num(r.lhs),
            Cell::Num(r.lhs_err),
            Cell::Num(r.rhs),
            Cell::Num(r.constant),
            Cell::Int(r.n_paths as i64),
            Cell::text(&r.verdict.to_string()),
        ]);
    }
    let mut s = Table::new(&["case", "p", "lambda_lo", "lambda_hi", "norm_lo", "norm_hi", "slope"]);
    for r in &rep.slopes {
        s.push(vec![
            Cell::text(&r.case),
            Cell::Num(r.p),
            Cell::Num(r.lambdas[0]),
            Cell::Num(*r.lambdas.last().expect("two lambdas")),
            Cell::Num(r.norms[0]),
            Cell::Num(*r.norms.last().expect("two lambdas")),
            Cell::Num(r.slope),
        ]);
    }
    let slope_ok = rep.slopes.iter().all(|r| (r.slope + 1.0).abs() <= 0.1);
    let mut outcome = verdict_outcome(rep.rows.iter());
    if !slope_ok {
        outcome = Outcome::Fail;
    }
    let worst = rep.slopes.iter().map(|r| r.slope).fold(f64::NAN, |a, b| if (b + 1.0).abs() > (a + 1.0).abs() || a.is_nan() { b } else { a });
    let detail = format!(
        "max C (Lu) {:.3}, max C (u) {:.3}, worst rho slope {worst:.3}",
        rep.max_constant("Lu"),
        rep.max_constant("u")
    );
    Ok(SuiteResult { tables: vec![("t1".into(), t), ("t1_slopes".into(), s)], outcome, detail })
}

fn hormander(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let st = Stack::build(cfg)?;
    if cfg.grid.d != 1 {
        return Err(Error::SuitePrereq { suite: "hormander".into(), cause: "implemented for d = 1 only".into() });
    }
    let h = &cfg.hormander;
    let dmax = h.deltas.iter().cloned().fold(0.0, f64::max);
    let setup = HormanderSetup::new(&st.pi, &st.pi, &st.kappa, h.c0, h.lambda, dmax)?;
    let rep = hormander_sweep(&setup, &h.deltas, &h.s_fracs, &h.y_fracs)?;
    let mut t = Table::new(&["delta", "s", "y", "value", "inner", "outer", "tail", "tail_share"]);
    for p in &rep.points {
        t.push(vec![
            Cell::Num(p.delta),
            Cell::Num(p.s),
            Cell::Num(p.y),
            Cell::Num(p.value),
            Cell::Num(p.inner),
            Cell::Num(p.outer),
            Cell::Num(p.tail),
            Cell::Num(p.tail_share),
        ]);
    }
    let grid = SpaceTimeGrid::new(h.nt, h.nx, 1.0, -1.0, 1.0)?;
    let kernel = spectral_kernel(&grid, &st.pi, &st.pi, h.lambda, 0.0, 4)?;
    let mut lp = Table::new(&["p", "a_half", "a_full", "drift", "m0"]);
    let mut drift: f64 = 0.0;
    let lp_detail = match verify_stoch_hormander_lp(&kernel, &rep, &[2.0, 4.0], h.corpus, cfg.seed) {
        Ok(r) => {
            for row in &r.rows {
                drift = drift.max(row.drift.abs());
                lp.push(vec![Cell::Num(row.p), Cell::Num(row.a_half), Cell::Num(row.a_full), Cell::Num(row.drift), Cell::Num(r.m0)]);
            }
            format!("max corpus-doubling drift {drift:.3}")
        }
        Err(e @ Error::PrereqFailed(_)) => {
            drift = f64::INFINITY;
            e.to_string()
        }
        Err(e) => return Err(e),
    };
    let ok = rep.plateau() && drift < 0.15;
    let detail = format!("sup {:.6}, variation across delta {:.3}; {lp_detail}", rep.sup, rep.variation());
    Ok(SuiteResult { tables: vec![("hormander".into(), t), ("hormander_lp".into(), lp)], outcome: Outcome::from_bool(ok), detail })
}

fn cz(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let st = Stack::build(cfg)?;
    let c = &cfg.cz;
    let mut t = Table::new(&[
        "n", "field", "weak_centered", "weak_noncentered", "fs2", "fs4", "cover", "g_constant", "reconstruction",
        "part_integral", "parts",
    ]);
    let mut reports = Vec::new();
    for &n in &c.resolutions {
        let grid = SpaceTimeGrid::new(n, n, c.horizon, c.x_lo, c.x_hi)?;
        let rep = cz_ensemble(&grid, &st.kappa, c.fields, cfg.seed)?;
        for r in &rep.rows {
            t.push(vec![
                Cell::Int(n as i64),
                Cell::Int(r.field as i64),
                Cell::Num(r.weak_centered),
                Cell::Num(r.weak_noncentered),
                Cell::Num(r.fs2),
                Cell::Num(r.fs4),
                Cell::Num(r.cover),
                Cell::Num(r.g_constant),
                Cell::Num(r.reconstruction),
                Cell::Num(r.part_integral),
                Cell::Int(r.parts as i64),
            ]);
        }
        reports.push(rep);
    }
    let exact = reports.iter().flat_map(|r| &r.rows).all(|r| r.reconstruction <= 4.0 * f64::EPSILON && r.part_integral < 1e-12);
    let variation = reports.windows(2).map(|w| w[0].variation(&w[1])).fold(1.0, f64::max);
    let ok = exact && variation < 2.0;
    Ok(one("cz", t, Outcome::from_bool(ok), format!("max constant ratio across resolutions {variation:.3}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_names_anchors() {
        assert!(find_suite("hormander").unwrap().anchors.contains("Hormander condition"));
        let cz = find_suite("cz").unwrap().anchors;
        assert!(cz.contains("Calderon-Zygmund") && cz.contains("Fefferman-Stein"));
        assert_eq!(suggest("hormandr")[0], "hormander");
    }

    #[test]
    fn stable_closed_form_matches_cauchy() {
        assert!((stable_symbol_1d(1.0, 0.5) + PI * PI).abs() < 1e-14);
        assert!((stable_symbol_1d(0.999999999, 0.5) + PI * PI).abs() < 1e-6);
    }

    #[test]
    fn wrong_scaling_is_a_domination_prerequisite_error() {
        let cfg = ExperimentConfig::parse(
            "seed = 1\nsuites = [\"t1\"]\n[measure]\nsigma = 0.5\n[scaling]\nkind = \"power\"\nexponent = 2.0\n",
        )
        .unwrap();
        let st = Stack::build(&cfg).unwrap();
        let e = t1_prerequisites(&cfg, &st).unwrap_err();
        assert!(matches!(e, Error::SuitePrereq { ref cause, .. } if cause.starts_with("DominationFailed")), "{e}");
    }
}
