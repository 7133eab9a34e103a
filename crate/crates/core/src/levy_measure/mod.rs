//! Lévy measures in radial–angular form.
//!
//! A measure is a finite set of angular nodes w_m with weights S_m, each
//! carrying a radial density ρ_m(r) (the factor r^{d−1} included), so that
//! ∫ f dπ = Σ_m S_m ∫₀^∞ f(r w_m) ρ_m(r) dr. Nodes sharing a radial profile
//! share its symbol computation.

mod assumptions;
mod bernstein;
pub mod radial;

pub use assumptions::{
    check_assumptions, AlphaPair, AssumptionReport, Mu0Certificate, ScaleRow,
};
pub use bernstein::{BernsteinFamily, BernsteinKernel, KernelReport};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quad::{head_integral, log_integral, logspace, tail_integral};
use crate::scaling::ScalingTriple;

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial density r ↦ ρ(r) on (0, support_max).
#[derive(Clone)]
pub struct RadialProfile {
    pub density: RadialFn,
    pub support_max: f64,
    pub label: String,
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 || r > self.support_max {
            0.0
        } else {
            (self.density)(r)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularNode {
    /// Unit vector (second component 0 in d = 1).
    pub direction: [f64; 2],
    pub weight: f64,
    pub profile: usize,
}

/// How the compensator i2πχ_σ(y)ξ·y enters the symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compensator {
    /// σ < 1: no compensation.
    None,
    /// σ = 1: compensate on |y| ≤ 1.
    UnitBall,
    /// σ > 1: compensate everywhere.
    Full,
}

impl Compensator {
    pub fn for_order(sigma: f64) -> Self {
        if sigma < 1.0 {
            Compensator::None
        } else if sigma == 1.0 {
            Compensator::UnitBall
        } else {
            Compensator::Full
        }
    }

    pub fn chi(self, r: f64) -> f64 {
        match self {
            Compensator::None => 0.0,
            Compensator::UnitBall => {
                if r <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Compensator::Full => 1.0,
        }
    }
}

#[derive(Clone)]
pub struct LevyMeasure {
    dim: usize,
    sigma: f64,
    nodes: Vec<AngularNode>,
    profiles: Vec<RadialProfile>,
    symmetric: bool,
    /// Per-node lower bound ρ₀(w_m) of the angular modulation (1 if none).
    floor: Vec<f64>,
    label: String,
}

impl fmt::Debug for LevyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyMeasure")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("sigma", &self.sigma)
            .field("nodes", &self.nodes.len())
            .field("profiles", &self.profiles.len())
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

/// Default number of angles on the circle.
pub const DEFAULT_ANGLES: usize = 64;

/// Angular quadrature: {±1} with unit weights for d = 1; M equally spaced
/// angles with weights 2π/M for d = 2 (antipodally symmetric for even M).
pub fn sphere_nodes(d: usize, m: usize) -> Vec<([f64; 2], f64)> {
    match d {
        1 => vec![([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0)],
        _ => (0..m)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                ([th.cos(), th.sin()], 2.0 * std::f64::consts::PI / m as f64)
            })
            .collect(),
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        invalid(format!("dimension must be 1 or 2, got {d}"))
    }
}

impl LevyMeasure {
    /// Assemble a measure from nodes and profiles; validates the invariants.
    pub fn from_parts(
        dim: usize,
        sigma: f64,
        nodes: Vec<AngularNode>,
        profiles: Vec<RadialProfile>,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_dim(dim)?;
        if !(sigma > 0.0 && sigma < 2.0) {
            return invalid(format!("order sigma must lie in (0,2), got {sigma}"));
        }
        let symmetric = detect_symmetry(&nodes, &profiles);
        let floor = vec![1.0; nodes.len()];
        let m = Self { dim, sigma, nodes, profiles, symmetric, floor, label: label.into() };
        m.validate()?;
        Ok(m)
    }

    /// π(dy) = dy/|y|^{d+σ}: radial density r^{−1−σ} on every direction.
    pub fn stable(dim: usize, sigma: f64) -> Result<Self> {
        Self::stable_with_angles(dim, sigma, DEFAULT_ANGLES)
    }

    pub fn stable_with_angles(dim: usize, sigma: f64, angles: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(sigma > 0.0 && sigma < 2.0) {
            return invalid(format!("order sigma must lie in (0,2), got {sigma}"));
        }
        let profile = RadialProfile {
            density: Arc::new(move |r: f64| r.powf(-1.0 - sigma)),
            support_max: f64::INFINITY,
            label: format!("r^(-1-{sigma})"),
        };
        let nodes = sphere_nodes(dim, angles)
            .into_iter()
            .map(|(direction, weight)| AngularNode { direction, weight, profile: 0 })
            .collect();
        Self::from_parts(dim, sigma, nodes, vec![profile], format!("stable(d={dim},sigma={sigma})"))
    }

    /// One-sided stable measure (all mass on the direction +e₁) for σ < 1:
    /// a stable subordinator in the first coordinate.
    pub fn one_sided_stable(dim: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return invalid("one-sided stable measure needs sigma in (0,1)");
        }
        let profile = RadialProfile {
            density: Arc::new(move |r: f64| r.powf(-1.0 - sigma)),
            support_max: f64::INFINITY,
            label: format!("r^(-1-{sigma})"),
        };
        let node = AngularNode { direction: [1.0, 0.0], weight: 1.0, profile: 0 };
        Self::from_parts(dim, sigma, vec![node], vec![profile], format!("one-sided-stable({sigma})"))
    }

    /// The measure of a Bernstein kernel with angular modulation `a(r, w)`
    /// (None means a ≡ 1) over the standard sphere quadrature.
    pub fn bernstein(
        kernel: &BernsteinKernel,
        angles: usize,
        a: Option<Arc<dyn Fn(f64, [f64; 2]) -> f64 + Send + Sync>>,
    ) -> Result<Self> {
        let d = kernel.dim();
        let sphere = sphere_nodes(d, angles);
        let j = kernel.j_fn();
        let dm1 = (d - 1) as i32;
        let mut floor = vec![1.0; sphere.len()];
        let (nodes, profiles) = match a {
            None => {
                let p = RadialProfile {
                    density: Arc::new(move |r: f64| j(r) * r.powi(dm1)),
                    support_max: f64::INFINITY,
                    label: kernel.label(),
                };
                let nodes = sphere
                    .iter()
                    .map(|&(direction, weight)| AngularNode { direction, weight, profile: 0 })
                    .collect();
                (nodes, vec![p])
            }
            Some(a) => {
                floor = assumptions::check_modulation(&*a, &sphere)?;
                let mut nodes = Vec::new();
                let mut profiles = Vec::new();
                for (k, &(direction, weight)) in sphere.iter().enumerate() {
                    let (j, a) = (j.clone(), a.clone());
                    profiles.push(RadialProfile {
                        density: Arc::new(move |r: f64| a(r, direction) * j(r) * r.powi(dm1)),
                        support_max: f64::INFINITY,
                        label: format!("{}·a(·,w{k})", kernel.label()),
                    });
                    nodes.push(AngularNode { direction, weight, profile: k });
                }
                (nodes, profiles)
            }
        };
        let mut m = Self::from_parts(d, kernel.order(), nodes, profiles, format!("bernstein[{}]", kernel.label()))?;
        m.floor = floor;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn compensator(&self) -> Compensator {
        Compensator::for_order(self.sigma)
    }

    pub fn nodes(&self) -> &[AngularNode] {
        &self.nodes
    }

    pub fn profiles(&self) -> &[RadialProfile] {
        &self.profiles
    }

    /// True when every node has an antipode with the same weight and an
    /// identical radial density (the compensator then cancels).
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// ρ₀(w_m): lower bound of the angular modulation at node m.
    pub fn angular_floor(&self, m: usize) -> f64 {
        self.floor[m]
    }

    /// ψ(ξ) by direct radial quadrature on every node.
    pub fn symbol(&self, xi: [f64; 2]) -> Complex64 {
        self.symbol_at_level(xi, false)
    }

    /// ψ(ξ) at the refined quadrature level (halved panels, doubled range
    /// before the asymptotic tail).
    pub fn symbol_fine(&self, xi: [f64; 2]) -> Complex64 {
        self.symbol_at_level(xi, true)
    }

    fn symbol_at_level(&self, xi: [f64; 2], fine: bool) -> Complex64 {
        let comp = self.compensator();
        let imag = !self.symmetric;
        let mut cache: Vec<(usize, f64, Complex64)> = Vec::new();
        let mut acc = Complex64::new(0.0, 0.0);
        for n in &self.nodes {
            let a = xi[0] * n.direction[0] + xi[1] * n.direction[1];
            let v = match cache.iter().find(|c| c.0 == n.profile && c.1 == a) {
                Some(c) => c.2,
                None => {
                    let v = radial::profile_symbol(&self.profiles[n.profile], a, comp, imag, fine);
                    cache.push((n.profile, a, v));
                    v
                }
            };
            acc += n.weight * v;
        }
        acc
    }

    /// Radial density of node `m` at r.
    pub fn radial_density(&self, m: usize, r: f64) -> f64 {
        let n = &self.nodes[m];
        n.weight * self.profiles[n.profile].eval(r)
    }

    /// Σ_m S_m ∫ g(r) ρ_m(r) dr over r ∈ (lo, hi), with power-law
    /// extrapolation at 0 (lo = 0) and ∞ (hi = ∞). None if divergent.
    pub fn radial_moment(&self, lo: f64, hi: f64, g: impl Fn(f64) -> f64 + Copy) -> Option<f64> {
        let mut weights = vec![0.0; self.profiles.len()];
        for n in &self.nodes {
            weights[n.profile] += n.weight;
        }
        let mut total = 0.0;
        for (p, &w) in self.profiles.iter().zip(&weights) {
            let hi_eff = hi.min(p.support_max);
            if hi_eff <= lo || w == 0.0 {
                continue;
            }
            let f = |r: f64| g(r) * p.eval(r);
            let v = if lo == 0.0 {
                let cut = 1e-8f64.min(hi_eff * 1e-8);
                if hi_eff.is_finite() {
                    head_integral(cut, hi_eff, f)?
                } else {
                    head_integral(cut, 1.0, f)? + tail_integral(1.0, 1e8, f)?
                }
            } else if hi_eff.is_finite() {
                log_integral(lo, hi_eff, 0.5, f)
            } else {
                tail_integral(lo, 1e8f64.max(lo * 1e4), f)?
            };
            total += w * v;
        }
        Some(total)
    }

    fn validate(&self) -> Result<()> {
        for n in &self.nodes {
            if !(n.weight >= 0.0) {
                return Err(Error::MeasureInvalid(format!("negative angular weight {}", n.weight)));
            }
        }
        for p in &self.profiles {
            for &r in &logspace(1e-6, 1e6, 49) {
                let v = p.eval(r);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::MeasureInvalid(format!("radial density {} at r={r:e}", v)));
                }
            }
        }
        let small = self.radial_moment(0.0, 1.0, |r| r * r);
        let large = self.radial_moment(1.0, f64::INFINITY, |_| 1.0);
        if small.is_none() || large.is_none() {
            return Err(Error::MeasureInvalid("∫|y|²∧1 dπ diverges".into()));
        }
        if self.sigma > 1.0 && !self.symmetric && self.radial_moment(1.0, f64::INFINITY, |r| r).is_none() {
            return Err(Error::MeasureInvalid("order in (1,2) needs ∫_{|y|>1}|y| dπ < ∞".into()));
        }
        if self.sigma == 1.0 {
            for &(a, b) in &[(0.1, 0.5), (0.5, 2.0), (2.0, 50.0)] {
                let v = self.shell_first_moment(a, b);
                let scale = self.radial_moment(a, b, |r| r).unwrap_or(1.0);
                if v[0].abs().max(v[1].abs()) > 1e-12 * scale {
                    return Err(Error::MeasureInvalid(format!(
                        "order 1 needs ∫_{{{a}<|y|≤{b}}} y dπ = 0, got {v:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// ∫_{a<|y|≤b} y dπ.
    pub fn shell_first_moment(&self, a: f64, b: f64) -> [f64; 2] {
        let mut acc = [0.0; 2];
        let mut cache: Vec<Option<f64>> = vec![None; self.profiles.len()];
        for n in &self.nodes {
            let m = *cache[n.profile].get_or_insert_with(|| {
                let p = &self.profiles[n.profile];
                log_integral(a, b.min(p.support_max), 0.25, |r| r * p.eval(r))
            });
            acc[0] += n.weight * n.direction[0] * m;
            acc[1] += n.weight * n.direction[1] * m;
        }
        acc
    }

    /// π̃_R = κ(R)·π_R with π_R(Γ) = π(RΓ): radial density κ(R)·R·ρ(Rr).
    pub fn rescale(&self, r_scale: f64, kappa: &ScalingTriple) -> Result<Self> {
        if !(r_scale > 0.0) {
            return invalid(format!("rescale needs R > 0, got {r_scale}"));
        }
        let factor = kappa.kappa(r_scale) * r_scale;
        let profiles = self
            .profiles
            .iter()
            .map(|p| {
                let inner = p.density.clone();
                RadialProfile {
                    density: Arc::new(move |r: f64| factor * inner(r_scale * r)),
                    support_max: p.support_max / r_scale,
                    label: format!("{}@R={r_scale}", p.label),
                }
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            sigma: self.sigma,
            nodes: self.nodes.clone(),
            profiles,
            symmetric: self.symmetric,
            floor: self.floor.clone(),
            label: format!("{}~R={r_scale}", self.label),
        })
    }

    /// Restriction to |y| ≤ radius, multiplied by `scale`.
    pub fn truncated(&self, radius: f64, scale: f64) -> Self {
        let profiles = self
            .profiles
            .iter()
            .map(|p| {
                let inner = p.density.clone();
                RadialProfile {
                    density: Arc::new(move |r: f64| scale * inner(r)),
                    support_max: p.support_max.min(radius),
                    label: format!("{}|<={radius}", p.label),
                }
            })
            .collect();
        Self {
            dim: self.dim,
            sigma: self.sigma,
            nodes: self.nodes.clone(),
            profiles,
            symmetric: self.symmetric,
            floor: self.floor.clone(),
            label: format!("{}|B({radius})", self.label),
        }
    }

    /// The reflected measure π*(dy) = π(−dy).
    pub fn reflected(&self) -> Self {
        let mut m = self.clone();
        for n in &mut m.nodes {
            n.direction = [-n.direction[0], -n.direction[1]];
        }
        m.label = format!("{}*", self.label);
        m
    }
}

fn detect_symmetry(nodes: &[AngularNode], profiles: &[RadialProfile]) -> bool {
    let probe = logspace(1e-6, 1e6, 25);
    nodes.iter().all(|n| {
        nodes.iter().any(|m| {
            (m.direction[0] + n.direction[0]).abs() < 1e-12
                && (m.direction[1] + n.direction[1]).abs() < 1e-12
                && m.weight == n.weight
                && (m.profile == n.profile || {
                    let (p, q) = (&profiles[m.profile], &profiles[n.profile]);
                    p.support_max == q.support_max
                        && probe.iter().all(|&r| {
                            let (a, b) = (p.eval(r), q.eval(r));
                            (a - b).abs() <= 1e-14 * a.abs().max(b.abs())
                        })
                })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_first_moment_in_unit_ball() {
        let pi = LevyMeasure::stable(1, 0.5).unwrap();
        let v = pi.radial_moment(0.0, 1.0, |r| r).unwrap();
        assert!((v - 4.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn stable_is_self_similar() {
        let pi = LevyMeasure::stable(1, 0.5).unwrap();
        let k = ScalingTriple::power(0.5).unwrap();
        for &r_scale in &[1e-3, 0.7, 1.0, 42.0] {
            let t = pi.rescale(r_scale, &k).unwrap();
            for &r in &[1e-4, 0.3, 1.0, 17.0] {
                let (a, b) = (t.radial_density(0, r), pi.radial_density(0, r));
                assert!((a / b - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_bad_order_and_dimension() {
        assert!(LevyMeasure::stable(1, 2.0).is_err());
        assert!(LevyMeasure::stable(1, 0.0).is_err());
        assert!(LevyMeasure::stable(3, 1.0).is_err());
    }

    #[test]
    fn planar_stable_passes_invariants_and_cancels_shells() {
        let pi = LevyMeasure::stable(2, 1.5).unwrap();
        assert!(pi.is_symmetric());
        let c = LevyMeasure::stable(2, 1.0).unwrap();
        let v = c.shell_first_moment(0.3, 3.0);
        assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
    }

    #[test]
    fn one_sided_is_not_symmetric() {
        let pi = LevyMeasure::one_sided_stable(1, 0.5).unwrap();
        assert!(!pi.is_symmetric());
        assert!(pi.reflected().nodes()[0].direction[0] < 0.0);
    }
}
