//! Sampled checks of the nondegeneracy/moment assumptions: the μ⁰
//! certificate (A₀), domination π̃_R ≥ 1_{|y|≤1}μ⁰ (D), and the uniform
//! moment bound over R (B). A pass means "no violation on the grid".

use std::sync::Arc;

use super::radial::ProfileTable;
use super::{AngularNode, Compensator, LevyMeasure, RadialProfile};
use crate::error::{invalid, Error, Result};
use crate::quad::{gl8, logspace, pairwise_sum};
use crate::scaling::ScalingTriple;

/// Exponents of the B moments: ∫_{|z|≤1}|z|^{α₁} dπ̃_R + ∫_{|z|>1}|z|^{α₂} dπ̃_R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPair {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl AlphaPair {
    /// Enforce the regime rule: both in (0,1] for σ < 1, both in (1,2] for
    /// σ > 1, and α₁ ∈ (1,2], α₂ ∈ [0,1) for σ = 1.
    pub fn validate(&self, sigma: f64) -> Result<()> {
        let (a1, a2) = (self.alpha1, self.alpha2);
        let ok = if sigma < 1.0 {
            a1 > 0.0 && a1 <= 1.0 && a2 > 0.0 && a2 <= 1.0
        } else if sigma > 1.0 {
            a1 > 1.0 && a1 <= 2.0 && a2 > 1.0 && a2 <= 2.0
        } else {
            a1 > 1.0 && a1 <= 2.0 && (0.0..1.0).contains(&a2)
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("(alpha1, alpha2) = ({a1}, {a2}) outside the admissible range for sigma = {sigma}"))
        }
    }
}

/// A₀ certificate: μ⁰ on |y| ≤ 1 with the computed bound n₀ and
/// nondegeneracy constant c₁.
#[derive(Debug, Clone)]
pub struct Mu0Certificate {
    pub mu0: LevyMeasure,
    pub n0: f64,
    pub c1: f64,
    pub second_moment: f64,
    pub spectral_integral: f64,
    /// Relative change of the spectral integral between the two refinement levels.
    pub refinement_change: f64,
}

impl Mu0Certificate {
    /// Certify μ⁰ for a measure of order `sigma` (which fixes χ_σ in λ(ξ)).
    pub fn new(mu0: LevyMeasure, sigma: f64) -> Result<Self> {
        if mu0.profiles().iter().any(|p| p.support_max > 1.0) {
            return invalid("mu0 must be supported in the closed unit ball");
        }
        let second_moment = mu0
            .radial_moment(0.0, 1.0, |r| r * r)
            .ok_or_else(|| Error::MomentUnbounded("∫|y|² dμ⁰".into()))?;
        let c1 = nondegeneracy(&mu0);
        if !(c1 > 0.0) {
            return Err(Error::MeasureInvalid(format!("mu0 is degenerate: min_ξ ∫|ξ·y|² dμ⁰ = {c1}")));
        }
        let comp = Compensator::for_order(sigma);
        let tables: Vec<ProfileTable> =
            mu0.profiles().iter().map(|p| ProfileTable::build(p, Compensator::None, false)).collect();
        let coarse = spectral_integral(&mu0, &tables, comp, 0.25)?;
        let fine = spectral_integral(&mu0, &tables, comp, 0.125)?;
        let refinement_change = ((coarse - fine) / fine).abs();
        if !(refinement_change <= 1e-3) {
            return Err(Error::QuadratureNotConverged { xi: [0.0, 0.0], rel_change: refinement_change });
        }
        Ok(Self { n0: second_moment + fine, c1, second_moment, spectral_integral: fine, refinement_change, mu0 })
    }

    /// μ⁰ = c·1_{r≤1} r^{−1−β} ρ₀(w) S(dw) dr on the nodes of `pi`, certified
    /// for the order of `pi`.
    pub fn power_law(pi: &LevyMeasure, beta: f64, c: f64) -> Result<Self> {
        Self::new(power_law_measure(pi, beta, c)?, pi.sigma())
    }

    /// Largest c for which c·1_{r≤1} r^{−1−β}ρ₀(w)S(dw)dr lies below π̃_R for
    /// every R in the grid (the grid minimum of the density ratio, shaved by
    /// a relative 1e-9).
    pub fn largest_power_constant(pi: &LevyMeasure, kappa: &ScalingTriple, beta: f64, r_grid: &[f64]) -> Result<f64> {
        let radii = domination_radii();
        let mut c = f64::INFINITY;
        for &rs in r_grid {
            let pr = pi.rescale(rs, kappa)?;
            for (m, n) in pi.nodes().iter().enumerate() {
                let floor = pi.angular_floor(m) * n.weight;
                if floor == 0.0 {
                    continue;
                }
                for &r in &radii {
                    c = c.min(pr.radial_density(m, r) / (floor * r.powf(-1.0 - beta)));
                }
            }
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::DominationFailed { r_scale: r_grid.first().copied().unwrap_or(1.0), y: 0.0 });
        }
        Ok(c * (1.0 - 1e-9))
    }
}

fn power_law_measure(pi: &LevyMeasure, beta: f64, c: f64) -> Result<LevyMeasure> {
    if !(c > 0.0) {
        return invalid(format!("mu0 constant must be positive, got {c}"));
    }
    let profile = RadialProfile {
        density: Arc::new(move |r: f64| c * r.powf(-1.0 - beta)),
        support_max: 1.0,
        label: format!("{c}·r^(-1-{beta})|r<=1"),
    };
    let nodes = pi
        .nodes()
        .iter()
        .enumerate()
        .map(|(m, n)| AngularNode { direction: n.direction, weight: n.weight * pi.angular_floor(m), profile: 0 })
        .collect();
    LevyMeasure::from_parts(pi.dim(), beta, nodes, vec![profile], "mu0")
}

fn unit_directions(d: usize) -> Vec<[f64; 2]> {
    match d {
        1 => vec![[1.0, 0.0]],
        _ => (0..64)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 64.0;
                [th.cos(), th.sin()]
            })
            .collect(),
    }
}

/// min over sampled unit ξ of ∫_{|y|≤1} |ξ·y|² μ⁰(dy).
fn nondegeneracy(mu0: &LevyMeasure) -> f64 {
    let second: Vec<f64> = mu0
        .profiles()
        .iter()
        .map(|p| crate::quad::head_integral(1e-10, p.support_max.min(1.0), |r| r * r * p.eval(r)).unwrap_or(f64::NAN))
        .collect();
    unit_directions(mu0.dim())
        .iter()
        .map(|xi| {
            mu0.nodes()
                .iter()
                .map(|n| {
                    let c = xi[0] * n.direction[0] + xi[1] * n.direction[1];
                    n.weight * c * c * second[n.profile]
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// ψ₀(ξ) = −Re ψ^{μ⁰}(ξ) from the per-profile tables.
fn psi0(mu0: &LevyMeasure, tables: &[ProfileTable], xi: [f64; 2]) -> f64 {
    mu0.nodes()
        .iter()
        .map(|n| {
            let a = (xi[0] * n.direction[0] + xi[1] * n.direction[1]).abs();
            if a == 0.0 {
                return 0.0;
            }
            let v = tables[n.profile].lookup(a).unwrap_or_else(|| {
                super::radial::profile_symbol(&mu0.profiles()[n.profile], a, Compensator::None, false, false)
            });
            -n.weight * v.re
        })
        .sum()
}

/// λ(ξ) = ∫_{|y|≤1} χ_σ(y)|y|[(|ξ||y|) ∧ 1] μ⁰(dy).
fn lambda_weight(mu0: &LevyMeasure, comp: Compensator, rho: f64) -> f64 {
    if comp == Compensator::None {
        return 0.0;
    }
    let knee = (1.0 / rho).min(1.0);
    let inner = mu0.radial_moment(0.0, knee, |r| rho * r * r).unwrap_or(f64::NAN);
    let outer = if knee < 1.0 { mu0.radial_moment(knee, 1.0, |r| r).unwrap_or(f64::NAN) } else { 0.0 };
    inner + outer
}

/// ∫|ξ|⁴[1+λ(ξ)]^{d+3} e^{−ψ₀(ξ)} dξ in polar coordinates with log-|ξ| Gauss
/// panels of width `panel`, marching outward until the integrand is negligible.
fn spectral_integral(mu0: &LevyMeasure, tables: &[ProfileTable], comp: Compensator, panel: f64) -> Result<f64> {
    let d = mu0.dim();
    let dirs: Vec<[f64; 2]> = match d {
        1 => vec![[1.0, 0.0]],
        _ => (0..16)
            .map(|k| {
                let th = std::f64::consts::PI * (k as f64 + 0.5) / 16.0;
                [th.cos(), th.sin()]
            })
            .collect(),
    };
    // Full-sphere measure: 2 points in d=1, 2π in d=2 (ψ₀ is even).
    let sphere = if d == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let power = (d + 3) as i32;
    let integrand = |rho: f64| -> f64 {
        let lam = lambda_weight(mu0, comp, rho);
        let avg = dirs.iter().map(|&w| (-psi0(mu0, tables, [rho * w[0], rho * w[1]])).exp()).sum::<f64>()
            / dirs.len() as f64;
        sphere * rho.powi(power) * (1.0 + lam).powi(power) * avg
    };
    let rule = gl8();
    let mut parts = Vec::new();
    let mut u = (1e-6f64).ln();
    let mut peak: f64 = 0.0;
    loop {
        let v = rule.integrate(u, u + panel, |x| {
            let r = x.exp();
            r * integrand(r)
        });
        parts.push(v);
        peak = peak.max(v);
        u += panel;
        let edge = u.exp();
        if v < 1e-15 * peak && edge > 1.0 {
            break;
        }
        if edge > 1e12 {
            return Err(Error::MomentUnbounded("A0 spectral integral does not decay by |ξ| = 1e12".into()));
        }
    }
    Ok(pairwise_sum(&parts))
}

/// Sample angular modulation a(r, w) ∈ [0,1] and return ρ₀(w) = min_r a(r,w)
/// per node, after checking nondegeneracy of ρ₀ S(dw).
pub(crate) fn check_modulation(a: &dyn Fn(f64, [f64; 2]) -> f64, sphere: &[([f64; 2], f64)]) -> Result<Vec<f64>> {
    let radii = logspace(1e-6, 1e6, 49);
    let mut floors = Vec::with_capacity(sphere.len());
    for &(w, _) in sphere {
        let mut lo: f64 = 1.0;
        for &r in &radii {
            let v = a(r, w);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::KernelInvalid { condition: "G", at: r, detail: format!("a(r,w) = {v} at w = {w:?}") });
            }
            lo = lo.min(v);
        }
        floors.push(lo);
    }
    let d = if sphere.len() == 2 && sphere[0].0[1] == 0.0 && sphere[1].0[1] == 0.0 { 1 } else { 2 };
    let worst = unit_directions(d)
        .iter()
        .map(|xi| {
            sphere
                .iter()
                .zip(&floors)
                .map(|(&(w, s), &f)| (xi[0] * w[0] + xi[1] * w[1]).powi(2) * f * s)
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    if !(worst > 1e-12) {
        return Err(Error::KernelInvalid {
            condition: "G",
            at: 0.0,
            detail: format!("angular floor degenerate: min_ξ ∫|ξ·w|²ρ₀ dS = {worst:e}"),
        });
    }
    Ok(floors)
}

/// Radii of the domination grid inside the unit ball.
fn domination_radii() -> Vec<f64> {
    logspace(1e-6, 1.0, 60)
}

/// One scale of the D/B sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRow {
    pub r_scale: f64,
    /// min over the grid of (π̃_R density)/(μ⁰ density); ≥ 1 means D holds there.
    pub domination_margin: f64,
    pub moment_small: f64,
    pub moment_large: f64,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub rows: Vec<ScaleRow>,
    /// N₀ = max over R of the B moment sum.
    pub n0_moments: f64,
    pub alphas: AlphaPair,
    pub mu0_n0: f64,
    pub mu0_c1: f64,
}

/// Check D and B for `pi` against the certified μ⁰ on every scale of `r_grid`.
pub fn check_assumptions(
    pi: &LevyMeasure,
    kappa: &ScalingTriple,
    mu0: &Mu0Certificate,
    alphas: AlphaPair,
    r_grid: &[f64],
) -> Result<AssumptionReport> {
    alphas.validate(pi.sigma())?;
    if r_grid.len() < 2 {
        return invalid("R grid needs at least two scales");
    }
    let m0 = &mu0.mu0;
    if m0.nodes().len() != pi.nodes().len()
        || m0.nodes().iter().zip(pi.nodes()).any(|(a, b)| a.direction != b.direction)
    {
        return invalid("mu0 must be given on the angular nodes of pi");
    }
    let radii = domination_radii();
    let mut rows = Vec::with_capacity(r_grid.len());
    for &rs in r_grid {
        let pr = pi.rescale(rs, kappa)?;
        let mut margin = f64::INFINITY;
        for m in 0..pi.nodes().len() {
            for &r in &radii {
                let floor = m0.radial_density(m, r);
                if floor == 0.0 {
                    continue;
                }
                let v = pr.radial_density(m, r);
                if v < floor * (1.0 - 1e-12) {
                    return Err(Error::DominationFailed { r_scale: rs, y: r });
                }
                margin = margin.min(v / floor);
            }
        }
        let (a1, a2) = (alphas.alpha1, alphas.alpha2);
        let small = pr
            .radial_moment(0.0, 1.0, move |r| r.powf(a1))
            .ok_or_else(|| Error::MomentUnbounded(format!("∫_{{|z|≤1}}|z|^{a1} dπ̃_R diverges at R = {rs:e}")))?;
        let large = pr
            .radial_moment(1.0, f64::INFINITY, move |r| r.powf(a2))
            .ok_or_else(|| Error::MomentUnbounded(format!("∫_{{|z|>1}}|z|^{a2} dπ̃_R diverges at R = {rs:e}")))?;
        rows.push(ScaleRow { r_scale: rs, domination_margin: margin, moment_small: small, moment_large: large });
    }
    // Growth toward either end of the grid signals an unbounded sup over R.
    let total: Vec<f64> = rows.iter().map(|r| r.moment_small + r.moment_large).collect();
    let k = total.len();
    let slope = |i: usize, j: usize| {
        (total[j].ln() - total[i].ln()) / (rows[j].r_scale.ln() - rows[i].r_scale.ln())
    };
    let (s_lo, s_hi) = (slope(0, 1), slope(k - 2, k - 1));
    if s_lo < -0.02 || s_hi > 0.02 {
        return Err(Error::MomentUnbounded(format!(
            "B moments grow across the R grid (end slopes {s_lo:.3}, {s_hi:.3})"
        )));
    }
    let n0_moments = total.iter().cloned().fold(0.0, f64::max);
    Ok(AssumptionReport { rows, n0_moments, alphas, mu0_n0: mu0.n0, mu0_c1: mu0.c1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        logspace(1e-3, 1e3, 7)
    }

    #[test]
    fn stable_half_passes_with_unit_first_moment_four() {
        let pi = LevyMeasure::stable(1, 0.5).unwrap();
        let k = ScalingTriple::power(0.5).unwrap();
        let mu0 = Mu0Certificate::power_law(&pi, 0.5, 1.0).unwrap();
        let rep = check_assumptions(&pi, &k, &mu0, AlphaPair { alpha1: 1.0, alpha2: 0.25 }, &grid()).unwrap();
        for row in &rep.rows {
            assert!((row.moment_small - 4.0).abs() < 4e-6, "{row:?}");
            assert!(row.domination_margin >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn wrong_scaling_fails_domination() {
        let pi = LevyMeasure::stable(1, 0.5).unwrap();
        let k = ScalingTriple::power(2.0).unwrap();
        let mu0 = Mu0Certificate::power_law(&pi, 0.5, 1.0).unwrap();
        let err = check_assumptions(&pi, &k, &mu0, AlphaPair { alpha1: 1.0, alpha2: 0.25 }, &grid()).unwrap_err();
        match err {
            Error::DominationFailed { r_scale, .. } => assert!(r_scale < 1.0),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn regime_rule_enforced() {
        assert!(AlphaPair { alpha1: 1.5, alpha2: 0.5 }.validate(0.5).is_err());
        assert!(AlphaPair { alpha1: 1.5, alpha2: 0.5 }.validate(1.0).is_ok());
        assert!(AlphaPair { alpha1: 2.0, alpha2: 1.1 }.validate(1.5).is_ok());
    }

    #[test]
    fn certificate_integrals_converge() {
        let pi = LevyMeasure::stable(2, 1.0).unwrap();
        let mu0 = Mu0Certificate::power_law(&pi, 1.0, 0.5).unwrap();
        assert!(mu0.refinement_change < 1e-3);
        assert!(mu0.c1 > 0.0 && mu0.n0.is_finite());
    }
}
