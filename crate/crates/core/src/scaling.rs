//! Scaling calculus: a scaling function κ with factor l (κ(εr) ≤ l(ε)κ(r)),
//! the generalized inverses a(t) = inf{r : κ(r) ≥ t}, a⁻¹ and
//! γ(t) = inf{r : l(r) ≥ t}, the engulfing constant of anisotropic cylinders,
//! and the integrability conditions that the main a priori estimate needs.
//!
//! Inverses are computed by 80-step bisection in log-scale over
//! [1e-12, 1e12] on the monotone upper envelope r ↦ sup_{s≤r} κ(s), so κ only
//! has to be continuous, not strictly increasing.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{gl8, logspace, pairwise_sum};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const DOMAIN_LO: f64 = 1e-12;
pub const DOMAIN_HI: f64 = 1e12;
const BISECT_STEPS: usize = 80;
const ENVELOPE_PER_DECADE: usize = 100;

#[derive(Clone)]
pub struct ScalingTriple {
    kappa: ScalarFn,
    l: ScalarFn,
    /// Running maximum of κ on the log grid, for the monotone envelope.
    envelope: Arc<Vec<f64>>,
    k0: f64,
    label: String,
}

impl fmt::Debug for ScalingTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalingTriple")
            .field("label", &self.label)
            .field("k0", &self.k0)
            .finish()
    }
}

impl ScalingTriple {
    /// κ(R) = R^σ with l(ε) = ε^σ.
    pub fn power(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("power scaling needs exponent > 0, got {sigma}")));
        }
        derive_inverses(
            Arc::new(move |r: f64| r.powf(sigma)),
            Arc::new(move |e: f64| e.powf(sigma)),
            format!("power({sigma})"),
        )
    }

    /// κ paired with the piecewise factor l(ε) = C₁ε^{2δ₁} (ε ≤ 1),
    /// C₁ε^{2δ₂} (ε > 1); C₁ is the smallest constant valid on the
    /// validation grid.
    pub fn piecewise(kappa: ScalarFn, delta1: f64, delta2: f64, label: impl Into<String>) -> Result<Self> {
        let shape = move |e: f64| {
            if e <= 1.0 {
                e.powf(2.0 * delta1)
            } else {
                e.powf(2.0 * delta2)
            }
        };
        let mut c1: f64 = 1.0;
        for &e in &validation_axis() {
            for &r in &validation_axis() {
                let ratio = kappa(e * r) / kappa(r) / shape(e);
                if ratio.is_finite() {
                    c1 = c1.max(ratio);
                }
            }
        }
        let l: ScalarFn = Arc::new(move |e: f64| c1 * shape(e));
        derive_inverses(kappa, l, label)
    }

    /// Skip the scaling validation (for integrability studies with
    /// hand-made l that need no κ).
    pub fn unchecked(kappa: ScalarFn, l: ScalarFn, label: impl Into<String>) -> Self {
        build(kappa, l, label.into())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kappa(&self, r: f64) -> f64 {
        (self.kappa)(r)
    }

    pub fn l(&self, eps: f64) -> f64 {
        (self.l)(eps)
    }

    pub fn kappa_fn(&self) -> ScalarFn {
        self.kappa.clone()
    }

    /// Engulfing constant K₀ ≥ 3.
    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// sup_{s ≤ r} κ(s) (on the cached grid plus the point r itself).
    pub fn envelope(&self, r: f64) -> f64 {
        let u = (r / DOMAIN_LO).log10() * ENVELOPE_PER_DECADE as f64;
        let k = u.floor();
        let k = if k < 0.0 { None } else { Some((k as usize).min(self.envelope.len() - 1)) };
        let here = self.kappa(r);
        match k {
            Some(k) => here.max(self.envelope[k]),
            None => here,
        }
    }

    /// a(t) = inf{r : κ(r) ≥ t}.
    pub fn a(&self, t: f64) -> f64 {
        bisect_inf(|r| self.envelope(r) >= t, DOMAIN_LO, DOMAIN_HI)
    }

    /// a⁻¹(s) = inf{t : a(t) ≥ s}; computed from its definition.
    pub fn a_inv(&self, s: f64) -> f64 {
        let lo = self.envelope(DOMAIN_LO).max(f64::MIN_POSITIVE);
        let hi = self.envelope(DOMAIN_HI);
        bisect_inf(|t| self.a(t) >= s, lo, hi)
    }

    /// γ(t) = inf{r : l(r) ≥ t}.
    pub fn gamma(&self, t: f64) -> f64 {
        bisect_inf(|r| self.l(r) >= t, DOMAIN_LO, DOMAIN_HI)
    }

    /// Volume of Q_δ up to the ball constant: 2κ(δ)·δ^d.
    pub fn cylinder_volume(&self, delta: f64, d: usize) -> f64 {
        2.0 * self.kappa(delta) * delta.powi(d as i32)
    }
}

fn build(kappa: ScalarFn, l: ScalarFn, label: String) -> ScalingTriple {
    let decades = (DOMAIN_HI / DOMAIN_LO).log10();
    let n = (decades * ENVELOPE_PER_DECADE as f64).round() as usize + 1;
    let mut env = Vec::with_capacity(n);
    let mut run = f64::NEG_INFINITY;
    for k in 0..n {
        let r = DOMAIN_LO * 10f64.powf(k as f64 / ENVELOPE_PER_DECADE as f64);
        let v = kappa(r);
        if v.is_finite() {
            run = run.max(v);
        }
        env.push(run);
    }
    let mut t = ScalingTriple { kappa, l, envelope: Arc::new(env), k0: 3.0, label };
    t.k0 = engulfing_constant(&t).k0;
    t
}

fn validation_axis() -> Vec<f64> {
    logspace(1e-6, 1e6, 32)
}

/// Build the triple after checking κ(εr) ≤ l(ε)κ(r)(1+1e-9) on the 32×32
/// (ε, r) grid and the limits of κ at the grid extremes.
pub fn derive_inverses(kappa: ScalarFn, l: ScalarFn, label: impl Into<String>) -> Result<ScalingTriple> {
    let axis = validation_axis();
    for &e in &axis {
        let le = l(e);
        for &r in &axis {
            let lhs = kappa(e * r);
            let rhs = le * kappa(r);
            if !(lhs <= rhs * (1.0 + 1e-9)) {
                return Err(Error::NotScaling { eps: e, r, ratio: lhs / rhs });
            }
        }
    }
    let k1 = kappa(1.0);
    if !(kappa(DOMAIN_LO) < 1e-2 * k1 && kappa(DOMAIN_HI) > 1e2 * k1) {
        return Err(Error::InvalidParameter(
            "kappa must tend to 0 at 0 and to infinity at infinity".into(),
        ));
    }
    Ok(build(kappa, l, label.into()))
}

/// inf{x ∈ [lo, hi] : pred(x)} for a monotone predicate, bisecting in log x.
/// Returns `hi` if the predicate never holds.
fn bisect_inf(pred: impl Fn(f64) -> bool, lo: f64, hi: f64) -> f64 {
    if pred(lo) {
        return lo;
    }
    if !pred(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..BISECT_STEPS {
        let m = 0.5 * (a + b);
        if pred(m.exp()) {
            b = m;
        } else {
            a = m;
        }
    }
    b.exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngulfingReport {
    pub k0: f64,
    /// max over sampled δ of |Q_{K₀δ}| / (K₀^d l(K₀) |Q_δ|) for d = 1, 2.
    pub worst_volume_ratio: f64,
    pub capped: bool,
}

/// Smallest K₀ ≥ 3 with Q_{δ'}(r,z) ⊆ Q_{K₀δ}(t,x) whenever δ' ≤ δ and the
/// two cylinders touch. The worst touching configuration puts the centres
/// δ+δ' apart in space and κ(δ)+κ(δ') apart in time, so containment needs
/// K₀δ ≥ δ+2δ' and κ(K₀δ) ≥ κ(δ)+2κ(δ').
pub fn engulfing_constant(t: &ScalingTriple) -> EngulfingReport {
    let deltas = logspace(1e-3, 1e3, 13);
    let ratios = [1e-3, 1e-2, 0.1, 0.5, 1.0];
    let ok = |k: f64| {
        deltas.iter().all(|&d| {
            ratios.iter().all(|&u| {
                let dp = u * d;
                k * d >= d + 2.0 * dp && t.kappa(k * d) >= t.kappa(d) + 2.0 * t.kappa(dp)
            })
        })
    };
    let cap = 1e3;
    let (k0, capped) = if ok(3.0) {
        (3.0, false)
    } else if !ok(cap) {
        (cap, true)
    } else {
        (bisect_inf(ok, 3.0, cap), false)
    };
    let mut worst: f64 = 0.0;
    for &d in &deltas {
        let lhs = t.kappa(k0 * d) / t.kappa(d);
        worst = worst.max(lhs / t.l(k0));
    }
    EngulfingReport { k0, worst_volume_ratio: worst, capped }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailVerdict {
    Finite(f64),
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralReport {
    pub name: &'static str,
    /// Raw truncated integrals at the two truncation levels.
    pub truncated: [f64; 2],
    /// Tail-extrapolated estimates (NaN where no power tail was detected).
    pub extrapolated: [f64; 2],
    pub verdict: TailVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub conditions: Vec<IntegralReport>,
}

impl IntegrabilityReport {
    pub fn all_finite(&self) -> bool {
        self.conditions.iter().all(|c| matches!(c.verdict, TailVerdict::Finite(_)))
    }
}

/// Integrates G over (ln lo, ln hi) in the log variable.
fn log_gl(lo: f64, hi: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let k = ((b - a) / 0.25).ceil().max(1.0) as usize;
    let w = (b - a) / k as f64;
    let parts: Vec<f64> = (0..k)
        .map(|i| {
            let u0 = a + w * i as f64;
            gl8().integrate(u0, u0 + w, |u| g(u.exp()))
        })
        .collect();
    pairwise_sum(&parts)
}

fn log_slope(g: &dyn Fn(f64) -> f64, t: f64) -> f64 {
    let h = 0.1f64;
    let (a, b) = (g(t * (-h).exp()), g(t * h.exp()));
    if a <= 0.0 || b <= 0.0 {
        return f64::NAN;
    }
    (b.ln() - a.ln()) / (2.0 * h)
}

/// ∫ G(t) dt/t over (1, ∞) (`at_infinity`) or (0, 1), truncated at two
/// levels and tail-extrapolated assuming G ~ t^{∓q} beyond the cut.
fn improper(name: &'static str, g: &dyn Fn(f64) -> f64, at_infinity: bool) -> IntegralReport {
    let cuts = if at_infinity { [1e4, 1e6] } else { [1e-4, 1e-6] };
    let mut truncated = [0.0; 2];
    let mut extrapolated = [f64::NAN; 2];
    let mut decays = [false; 2];
    for (i, &c) in cuts.iter().enumerate() {
        truncated[i] = if at_infinity { log_gl(1.0, c, g) } else { log_gl(c, 1.0, g) };
        let slope = log_slope(g, c);
        let q = if at_infinity { -slope } else { slope };
        if q.is_finite() && q > 0.02 {
            decays[i] = true;
            extrapolated[i] = truncated[i] + g(c) / q;
        }
    }
    let verdict = if decays[0] && decays[1] {
        let rel = (extrapolated[0] - extrapolated[1]).abs() / extrapolated[1].abs().max(f64::MIN_POSITIVE);
        if rel <= 0.05 {
            TailVerdict::Finite(extrapolated[1])
        } else {
            TailVerdict::Inconclusive
        }
    } else if truncated[1] > 1.5 * truncated[0] || !truncated[1].is_finite() {
        TailVerdict::Divergent
    } else {
        TailVerdict::Inconclusive
    };
    IntegralReport { name, truncated, extrapolated, verdict }
}

/// The integrability hypotheses of the main theorem:
/// ∫₁^∞ dt/(tγ^{1∧α₂}) < ∞, and for p > 2 also
/// ∫₀¹ γ^{−β₁}dt, ∫₀¹ l^{β₂}dt/t and ∫₁^∞ γ^{−β₀}dt/t finite.
pub fn check_t1_integrability(
    t: &ScalingTriple,
    alpha2: f64,
    beta0: f64,
    beta1: f64,
    beta2: f64,
    p: f64,
) -> Result<IntegrabilityReport> {
    if !(beta0 < alpha2 && beta1 > 0.0 && beta2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need beta0 < alpha2 and beta1, beta2 > 0 (got {beta0}, {alpha2}, {beta1}, {beta2})"
        )));
    }
    let m = alpha2.min(1.0);
    let mut conditions = vec![improper("int_1^inf dt/(t gamma^(1^alpha2))", &|s| t.gamma(s).powf(-m), true)];
    if p > 2.0 {
        conditions.push(improper("int_0^1 gamma^(-beta1) dt", &|s| s * t.gamma(s).powf(-beta1), false));
        conditions.push(improper("int_0^1 l^beta2 dt/t", &|s| t.l(s).powf(beta2), false));
        conditions.push(improper("int_1^inf gamma^(-beta0) dt/t", &|s| t.gamma(s).powf(-beta0), true));
    }
    Ok(IntegrabilityReport { conditions })
}
