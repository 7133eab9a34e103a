//! Experiment configuration: a TOML tree with every default spelled out, so
//! the resolved config written to the manifest reproduces the run exactly.

use serde::{Deserialize, Serialize};

use super::suites::{suggest, SUITES};
use crate::error::{Error, Result};

fn cfg_err<T>(field: &str, message: impl Into<String>) -> Result<T> {
    Err(Error::Config { field: field.into(), message: message.into() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub suites: Vec<String>,
    #[serde(default)]
    pub measure: MeasureConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub spaces: SpacesConfig,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub assumptions: AssumptionsConfig,
    #[serde(default)]
    pub hormander: HormanderConfig,
    #[serde(default)]
    pub cz: CzConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Stable,
    Bernstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    PowerSum,
    LogPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureConfig {
    pub family: Family,
    /// Order of the stable measure.
    pub sigma: f64,
    /// Bernstein kernel: φ(r) = Σ r^{α_i} or r^α ln(1+r)^β.
    pub kernel: KernelKind,
    pub exponents: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Angular quadrature nodes (d = 2).
    pub angles: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            family: Family::Stable,
            sigma: 1.0,
            kernel: KernelKind::PowerSum,
            exponents: vec![0.6, 0.8],
            alpha: 0.5,
            beta: 0.25,
            angles: crate::levy_measure::DEFAULT_ANGLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingKind {
    /// κ of the measure itself: R^σ for stable, the kernel's κ for Bernstein.
    Natural,
    /// κ(R) = R^exponent.
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub kind: ScalingKind,
    pub exponent: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { kind: ScalingKind::Natural, exponent: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "box")]
    pub box_len: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { d: 1, n: 256, box_len: 16.0 }
    }
}

/// LP base: a number, or "auto" (smallest N with l(1/N) < 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseSetting {
    Fixed(u32),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpacesConfig {
    pub base: BaseSetting,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
}

impl Default for SpacesConfig {
    fn default() -> Self {
        Self { base: BaseSetting::Named("auto".into()), p: vec![1.5, 2.0, 3.0, 4.0], s: vec![0.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub lambda: Vec<f64>,
    pub horizon: f64,
    /// Uniform steps on [0, T] (Δt = T/steps).
    pub steps: usize,
    /// Steps of the residual-order study.
    pub order_steps: Vec<usize>,
    /// λ values of the ρ_λ regression.
    pub slope_lambda: Vec<f64>,
    /// Every `stride`-th uniform node enters the time integrals.
    pub stride: usize,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            lambda: vec![0.0, 1.0, 10.0],
            horizon: 1.0,
            steps: 512,
            order_steps: vec![64, 128, 256, 512],
            slope_lambda: vec![10.0, 100.0],
            stride: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    /// Paths for quantities with p ≤ 2.
    pub n_low: usize,
    /// Paths for p > 2.
    pub n_high: usize,
    /// Paths of the isometry check.
    pub isometry: usize,
    /// Threshold of the "violated" verdict.
    pub c_cap: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { n_low: 2000, n_high: 8000, isometry: 10_000, c_cap: 1e3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssumptionsConfig {
    /// Exponents of the B moments; negative means "pick from the orders of π".
    pub alpha1: f64,
    pub alpha2: f64,
    /// μ⁰ = c·r^{−1−β} on |y| ≤ 1; β < 0 means β = σ.
    pub mu0_beta: f64,
    pub mu0_c: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r_count: usize,
}

impl Default for AssumptionsConfig {
    fn default() -> Self {
        Self { alpha1: -1.0, alpha2: -1.0, mu0_beta: -1.0, mu0_c: -1.0, r_min: 1e-3, r_max: 1e3, r_count: 7 }
    }
}

impl AssumptionsConfig {
    /// (α₁, α₂) inside the admissible range of σ when not given; α₂ also stays
    /// below `large`, the order of the large jumps.
    pub fn alphas(&self, sigma: f64, large: f64) -> (f64, f64) {
        let cap = sigma.min(large);
        let auto = if sigma < 1.0 {
            (1.0, 0.5 * cap)
        } else if sigma > 1.0 {
            (2.0, 0.5 * (1.0 + cap))
        } else {
            (1.5, 0.5 * cap)
        };
        (if self.alpha1 < 0.0 { auto.0 } else { self.alpha1 }, if self.alpha2 < 0.0 { auto.1 } else { self.alpha2 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HormanderConfig {
    pub c0: f64,
    pub lambda: f64,
    pub deltas: Vec<f64>,
    pub s_fracs: Vec<f64>,
    pub y_fracs: Vec<f64>,
    /// Space-time grid and corpus of the L_p bound of the square function.
    pub nt: usize,
    pub nx: usize,
    pub corpus: usize,
}

impl Default for HormanderConfig {
    fn default() -> Self {
        Self {
            c0: 4.0,
            lambda: 0.0,
            deltas: crate::quad::logspace(0.1, 10.0, 5),
            s_fracs: vec![-1.0, 0.0, 0.5, 1.0],
            y_fracs: vec![0.0, 0.5, 1.0],
            nt: 24,
            nx: 32,
            corpus: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CzConfig {
    pub horizon: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Resolutions n (n × n cells) at which the corpus is evaluated.
    pub resolutions: Vec<usize>,
    pub fields: usize,
}

impl Default for CzConfig {
    fn default() -> Self {
        Self { horizon: 1.0, x_lo: -1.0, x_hi: 1.0, resolutions: vec![32, 64], fields: 50 }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let field = match e.span() {
                Some(span) => format!("line {}", 1 + text[..span.start.min(text.len())].matches('\n').count()),
                None => "config".into(),
            };
            Error::Config { field, message: e.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The resolved tree, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return cfg_err("suites", "at least one suite is required");
        }
        for s in &self.suites {
            if !SUITES.iter().any(|x| x.id == s) {
                return cfg_err("suites", format!("unknown suite '{s}'; did you mean: {}", suggest(s).join(", ")));
            }
        }
        let m = &self.measure;
        if m.family == Family::Stable && !(m.sigma > 0.0 && m.sigma < 2.0) {
            return cfg_err("measure.sigma", format!("stable order must lie in (0,2), got {}", m.sigma));
        }
        if m.angles < 4 {
            return cfg_err("measure.angles", "need at least 4 angular nodes");
        }
        if self.scaling.kind == ScalingKind::Power && !(self.scaling.exponent > 0.0) {
            return cfg_err("scaling.exponent", "power scaling needs a positive exponent");
        }
        let g = &self.grid;
        if !(1..=2).contains(&g.d) {
            return cfg_err("grid.d", "dimension must be 1 or 2");
        }
        if g.n < 8 || !g.n.is_power_of_two() {
            return cfg_err("grid.n", "grid size must be a power of two >= 8");
        }
        if !(g.box_len > 0.0) {
            return cfg_err("grid.box", "box length must be positive");
        }
        if let BaseSetting::Named(s) = &self.spaces.base {
            if s != "auto" {
                return cfg_err("spaces.base", format!("expected an integer >= 2 or \"auto\", got \"{s}\""));
            }
        }
        if let BaseSetting::Fixed(b) = self.spaces.base {
            if b < 2 {
                return cfg_err("spaces.base", "LP base must be >= 2");
            }
        }
        if self.spaces.p.is_empty() || self.spaces.p.iter().any(|p| !(*p > 1.0 && p.is_finite())) {
            return cfg_err("spaces.p", "every p must be finite and > 1");
        }
        if self.spaces.s.iter().any(|s| !s.is_finite()) {
            return cfg_err("spaces.s", "smoothness values must be finite");
        }
        let pr = &self.problem;
        if pr.lambda.iter().chain(&pr.slope_lambda).any(|l| !(*l >= 0.0 && l.is_finite())) {
            return cfg_err("problem.lambda", "lambda values must be finite and >= 0");
        }
        if !(pr.horizon > 0.0) || pr.steps == 0 || pr.stride == 0 {
            return cfg_err("problem", "need T > 0, steps >= 1 and stride >= 1");
        }
        if pr.order_steps.len() < 2 || pr.order_steps.contains(&0) {
            return cfg_err("problem.order_steps", "need at least two positive step counts");
        }
        let e = &self.ensemble;
        if e.n_low < 2 || e.n_high < e.n_low || e.isometry < 2 || !(e.c_cap > 0.0) {
            return cfg_err("ensemble", "need n_high >= n_low >= 2, isometry >= 2, c_cap > 0");
        }
        let a = &self.assumptions;
        if !(a.r_min > 0.0 && a.r_max > a.r_min) || a.r_count < 2 {
            return cfg_err("assumptions", "need 0 < r_min < r_max and r_count >= 2");
        }
        let h = &self.hormander;
        if h.deltas.is_empty() || h.deltas.iter().any(|d| !(*d > 0.0)) {
            return cfg_err("hormander.deltas", "deltas must be positive");
        }
        if h.s_fracs.iter().chain(&h.y_fracs).any(|f| f.abs() > 1.0) {
            return cfg_err("hormander", "shift fractions must lie in [-1, 1]");
        }
        if h.nt == 0 || h.nx == 0 || h.corpus < 2 {
            return cfg_err("hormander", "need a nonempty grid and a corpus of at least two fields");
        }
        let c = &self.cz;
        if !(c.horizon > 0.0 && c.x_hi > c.x_lo) || c.resolutions.is_empty() || c.resolutions.iter().any(|n| *n < 4) || c.fields == 0 {
            return cfg_err("cz", "need a nonempty domain, resolutions >= 4 and at least one field");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::parse("seed = 1\nsuites = [\"symbols\"]\n").unwrap();
        assert_eq!(c.grid, GridConfig::default());
        let again = ExperimentConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn errors_name_the_field_or_line() {
        let e = ExperimentConfig::parse("seed = 1\nsuites = [\"symbols\"]\n[grid]\nn = 100\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "grid.n"), "{e}");
        let e = ExperimentConfig::parse("seed = 1\nsuites = [\"symbols\"]\n[grid]\nm = 1\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "line 4"), "{e}");
        let e = ExperimentConfig::parse("suites = [\"symbols\"]\n").unwrap_err();
        assert!(matches!(e, Error::Config { .. }));
    }

    #[test]
    fn unknown_suite_gets_suggestions() {
        let e = ExperimentConfig::parse("seed = 1\nsuites = [\"symbol\"]\n").unwrap_err();
        assert!(e.to_string().contains("symbols"), "{e}");
    }
}
