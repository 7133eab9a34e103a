//! Bernstein-function kernels j(r) = ∫(4πt)^{−d/2} e^{−r²/4t} Λ(dt).
//!
//! Two families: power sums φ(r) = Σ r^{α_i} (closed-form j), and the
//! log-power φ(r) = r^α ln(1+r)^β, a complete Bernstein function whose Lévy
//! density is recovered from the boundary values of φ on the negative axis:
//! Λ(dt) = m(t)dt, m(t) = ∫ e^{−ts} ν(s) ds, ν(s) = Im φ(−s+i0)/π.

use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::quad::{lagrange6, log_integral, logspace, pairwise_sum, tail_integral};
use crate::scaling::{ScalarFn, ScalingTriple};

#[derive(Debug, Clone, PartialEq)]
pub enum BernsteinFamily {
    /// φ(r) = Σ r^{α_i}, α_i ∈ (0,1).
    PowerSum(Vec<f64>),
    /// φ(r) = r^α (ln(1+r))^β, α ∈ (0,1), β ∈ (0, 1−α).
    LogPower { alpha: f64, beta: f64 },
}

/// Log-uniform table of log f(x) over [10^lo, 10^hi] with power-law
/// extrapolation past both ends.
#[derive(Debug, Clone)]
struct LogTable {
    x0: f64,
    h: f64,
    y: Vec<f64>,
}

impl LogTable {
    fn build(lo_dec: f64, hi_dec: f64, per_decade: usize, f: impl Fn(f64) -> f64) -> Self {
        let n = ((hi_dec - lo_dec) * per_decade as f64).round() as usize + 1;
        let h = std::f64::consts::LN_10 / per_decade as f64;
        let x0 = lo_dec * std::f64::consts::LN_10;
        let y = (0..n).map(|k| f((x0 + h * k as f64).exp()).ln()).collect();
        Self { x0, h, y }
    }

    fn eval(&self, x: f64) -> f64 {
        let u = x.ln();
        let n = self.y.len();
        let last = self.x0 + self.h * (n - 1) as f64;
        if u < self.x0 {
            let s = (self.y[1] - self.y[0]) / self.h;
            (self.y[0] + s * (u - self.x0)).exp()
        } else if u > last {
            let s = (self.y[n - 1] - self.y[n - 2]) / self.h;
            (self.y[n - 1] + s * (u - last)).exp()
        } else {
            lagrange6(&self.y, self.x0, self.h, u).exp()
        }
    }
}

#[derive(Debug, Clone)]
pub struct BernsteinKernel {
    family: BernsteinFamily,
    dim: usize,
    delta1: f64,
    delta2: f64,
    /// Quadrature of Λ(dt): (t_k, w_k) with Σ w_k f(t_k) ≈ ∫ f dΛ.
    lambda_nodes: Vec<(f64, f64)>,
    /// (α_i, prefactor of r^{−d−2α_i} in j) for power sums.
    power_terms: Vec<(f64, f64)>,
    /// Λ-density table (log-power only).
    m_table: Option<Arc<LogTable>>,
    j_table: Option<Arc<LogTable>>,
}

/// Outcome of the H(i)/H(ii) checks: the smallest N valid on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub n_hi: f64,
    pub n_hii: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// max relative error of φ reconstructed from Λ against φ itself.
    pub phi_reconstruction: f64,
    /// max relative error of j from the Λ quadrature against the table/closed form.
    pub j_crosscheck: f64,
}

/// Admissible bound on N in H(i)/H(ii) before the kernel is rejected.
const N_CAP: f64 = 1e3;

impl BernsteinKernel {
    pub fn new(family: BernsteinFamily, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return invalid(format!("dimension must be 1 or 2, got {dim}"));
        }
        match &family {
            BernsteinFamily::PowerSum(a) => {
                if a.is_empty() || a.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                    return invalid(format!("power-sum exponents must lie in (0,1): {a:?}"));
                }
                let (lo, hi) = a.iter().fold((1.0f64, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
                let alphas = a.clone();
                let m = move |t: f64| -> f64 {
                    alphas.iter().map(|&x| x / gamma(1.0 - x) * t.powf(-1.0 - x)).sum()
                };
                let lambda_nodes = density_nodes(&m);
                let power_terms = a.iter().map(|&x| (x, power_kernel(dim, x, 1.0))).collect();
                let k = Self {
                    family,
                    dim,
                    delta1: lo,
                    delta2: hi,
                    lambda_nodes,
                    power_terms,
                    m_table: None,
                    j_table: None,
                };
                Ok(k)
            }
            &BernsteinFamily::LogPower { alpha, beta } => {
                if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0 - alpha) {
                    return invalid(format!(
                        "log-power needs alpha in (0,1), beta in (0,1-alpha); got ({alpha},{beta})"
                    ));
                }
                let nu = move |s: f64| spectral_density(alpha, beta, s);
                let m_table = Arc::new(LogTable::build(-28.0, 28.0, 16, |t| laplace(&nu, t)));
                let mt = m_table.clone();
                let lambda_nodes = density_nodes(&move |t| mt.eval(t));
                let mt = m_table.clone();
                let j_table = Arc::new(LogTable::build(-12.0, 12.0, 16, |r| {
                    heat_transform(dim, r, &|t| mt.eval(t))
                }));
                Ok(Self {
                    family,
                    dim,
                    delta1: alpha,
                    delta2: alpha + beta,
                    lambda_nodes,
                    power_terms: Vec::new(),
                    m_table: Some(m_table),
                    j_table: Some(j_table),
                })
            }
        }
    }

    pub fn family(&self) -> &BernsteinFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    /// Order σ of the generated measure: twice the small-|y| exponent of j
    /// (2·max α_i for power sums, 2α for the log-power family).
    pub fn order(&self) -> f64 {
        match &self.family {
            BernsteinFamily::PowerSum(_) => 2.0 * self.delta2,
            BernsteinFamily::LogPower { alpha, .. } => 2.0 * alpha,
        }
    }

    /// Exponent 2δ with j(r) ≍ r^{−d−2δ} as r → ∞.
    pub fn large_scale_order(&self) -> f64 {
        match &self.family {
            BernsteinFamily::PowerSum(_) => 2.0 * self.delta1,
            BernsteinFamily::LogPower { .. } => 2.0 * self.delta2,
        }
    }

    pub fn label(&self) -> String {
        match &self.family {
            BernsteinFamily::PowerSum(a) => {
                let parts: Vec<String> = a.iter().map(|x| format!("r^{x}")).collect();
                parts.join("+")
            }
            BernsteinFamily::LogPower { alpha, beta } => format!("r^{alpha}ln(1+r)^{beta}"),
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        match &self.family {
            BernsteinFamily::PowerSum(a) => a.iter().map(|&x| r.powf(x)).sum(),
            &BernsteinFamily::LogPower { alpha, beta } => r.powf(alpha) * r.ln_1p().powf(beta),
        }
    }

    /// Λ-density m(t), Λ(dt) = m(t)dt.
    pub fn lambda_density(&self, t: f64) -> f64 {
        match &self.family {
            BernsteinFamily::PowerSum(a) => {
                a.iter().map(|&x| x / gamma(1.0 - x) * t.powf(-1.0 - x)).sum()
            }
            BernsteinFamily::LogPower { .. } => self.m_table.as_ref().map_or(0.0, |m| m.eval(t)),
        }
    }

    pub fn lambda_measure(&self) -> &[(f64, f64)] {
        &self.lambda_nodes
    }

    pub fn j(&self, r: f64) -> f64 {
        match &self.family {
            BernsteinFamily::PowerSum(_) => {
                let e = -(self.dim as f64);
                self.power_terms.iter().map(|&(x, c)| c * r.powf(e - 2.0 * x)).sum()
            }
            BernsteinFamily::LogPower { .. } => self.j_table.as_ref().map_or(0.0, |j| j.eval(r)),
        }
    }

    pub fn j_fn(&self) -> ScalarFn {
        let k = self.clone();
        Arc::new(move |r: f64| k.j(r))
    }

    /// κ(R) = j(R)⁻¹R^{−d} with the piecewise factor C₁ε^{2δ₁} / C₁ε^{2δ₂}.
    pub fn scaling(&self) -> Result<ScalingTriple> {
        let j = self.j_fn();
        let d = self.dim as i32;
        let kappa: ScalarFn = Arc::new(move |r: f64| 1.0 / (j(r) * r.powi(d)));
        ScalingTriple::piecewise(kappa, self.delta1, self.delta2, format!("bernstein[{}]", self.label()))
    }

    /// Check H(i) and H(ii) on log grids and cross-check the Λ representation.
    pub fn validate(&self) -> Result<KernelReport> {
        let d = self.dim as i32;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for &r in &logspace(1e-6, 1e6, 61) {
            let q = self.j(r) * r.powi(d) / self.phi(r.powi(-2));
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::KernelInvalid { condition: "H(i)", at: r, detail: format!("ratio {q}") });
            }
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let n_hi = hi.max(1.0 / lo);
        if n_hi > N_CAP {
            return Err(Error::KernelInvalid {
                condition: "H(i)",
                at: 0.0,
                detail: format!("N = {n_hi:.3e} exceeds {N_CAP:e}"),
            });
        }
        let grid = logspace(1e-8, 1e8, 49);
        let mut n_hii: f64 = 1.0;
        for (i, &r) in grid.iter().enumerate() {
            for &rr in &grid[i..] {
                let ratio = self.phi(rr) / self.phi(r);
                let q = rr / r;
                let lower = ratio / q.powf(self.delta1);
                let upper = q.powf(self.delta2) / ratio;
                n_hii = n_hii.max(1.0 / lower).max(1.0 / upper);
            }
        }
        if n_hii > N_CAP {
            return Err(Error::KernelInvalid {
                condition: "H(ii)",
                at: 0.0,
                detail: format!("N = {n_hii:.3e} exceeds {N_CAP:e}"),
            });
        }
        let mut phi_err: f64 = 0.0;
        for &lam in &logspace(1e-4, 1e4, 9) {
            let v = pairwise_sum(
                &self.lambda_nodes.iter().map(|&(t, w)| w * -(-lam * t).exp_m1()).collect::<Vec<_>>(),
            );
            phi_err = phi_err.max((v / self.phi(lam) - 1.0).abs());
        }
        let mut j_err: f64 = 0.0;
        for &r in &logspace(1e-3, 1e3, 7) {
            let dd = self.dim as f64;
            let v = pairwise_sum(
                &self
                    .lambda_nodes
                    .iter()
                    .map(|&(t, w)| w * (4.0 * std::f64::consts::PI * t).powf(-dd / 2.0) * (-r * r / (4.0 * t)).exp())
                    .collect::<Vec<_>>(),
            );
            j_err = j_err.max((v / self.j(r) - 1.0).abs());
        }
        Ok(KernelReport {
            n_hi,
            n_hii,
            delta1: self.delta1,
            delta2: self.delta2,
            phi_reconstruction: phi_err,
            j_crosscheck: j_err,
        })
    }
}

/// j for φ(r) = r^α: α/Γ(1−α)·(4π)^{−d/2}Γ(d/2+α)4^{d/2+α} r^{−d−2α}.
fn power_kernel(d: usize, alpha: f64, r: f64) -> f64 {
    let h = d as f64 / 2.0;
    alpha / gamma(1.0 - alpha)
        * (4.0 * std::f64::consts::PI).powf(-h)
        * gamma(h + alpha)
        * 4f64.powf(h + alpha)
        * r.powf(-(d as f64) - 2.0 * alpha)
}

/// ν(s) = Im φ(−s + i0)/π for φ(z) = z^α log(1+z)^β (principal branches).
fn spectral_density(alpha: f64, beta: f64, s: f64) -> f64 {
    let z = Complex64::new(-s, 0.0);
    let v = z.powf(alpha) * (Complex64::new(1.0, 0.0) + z).ln().powf(beta);
    (v.im / std::f64::consts::PI).max(0.0)
}

/// m(t) = ∫ e^{−ts} ν(s) ds = t⁻¹ ∫ e^{−v} ν(v/t) dv, split at the branch
/// point v = t (s = 1).
fn laplace(nu: &impl Fn(f64) -> f64, t: f64) -> f64 {
    let g = |v: f64| (-v).exp() * nu(v / t);
    let (lo, hi) = (1e-16, 60.0);
    let body = if t > lo && t < hi {
        log_integral(lo, t, 0.1, g) + log_integral(t, hi, 0.1, g)
    } else {
        log_integral(lo, hi, 0.1, g)
    };
    body / t
}

/// ∫(4πt)^{−d/2} e^{−r²/4t} m(t) dt via t = r²w.
fn heat_transform(d: usize, r: f64, m: &impl Fn(f64) -> f64) -> f64 {
    let h = d as f64 / 2.0;
    let r2 = r * r;
    let g = |w: f64| w.powf(-h) * (-0.25 / w).exp() * m(r2 * w);
    let v = log_integral(2e-3, 1.0, 0.25, g) + tail_integral(1.0, 1e4, g).unwrap_or(f64::NAN);
    v * r2.powf(1.0 - h) * (4.0 * std::f64::consts::PI).powf(-h)
}

/// Trapezoid nodes in log t for a Λ-density on [1e-40, 1e40].
fn density_nodes(m: &impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let per_decade = 16;
    let (lo, hi) = (-40.0f64, 40.0f64);
    let n = ((hi - lo) * per_decade as f64) as usize + 1;
    let du = std::f64::consts::LN_10 / per_decade as f64;
    (0..n)
        .map(|k| {
            let t = 10f64.powf(lo + k as f64 / per_decade as f64);
            let w = if k == 0 || k == n - 1 { 0.5 * du } else { du };
            (t, w * t * m(t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_power_kernel_is_inverse_square_over_pi() {
        let k = BernsteinKernel::new(BernsteinFamily::PowerSum(vec![0.5]), 1).unwrap();
        for &r in &[0.01f64, 1.0, 30.0] {
            let want = r.powi(-2) / std::f64::consts::PI;
            assert!((k.j(r) / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn power_sum_representation_is_consistent() {
        let k = BernsteinKernel::new(BernsteinFamily::PowerSum(vec![0.25, 0.75]), 1).unwrap();
        let rep = k.validate().unwrap();
        assert!(rep.phi_reconstruction < 1e-6, "{rep:?}");
        assert!(rep.j_crosscheck < 1e-6, "{rep:?}");
        assert_eq!((rep.delta1, rep.delta2), (0.25, 0.75));
    }

    #[test]
    fn log_power_spectral_density_recovers_phi() {
        let k = BernsteinKernel::new(BernsteinFamily::LogPower { alpha: 0.3, beta: 0.2 }, 1).unwrap();
        let rep = k.validate().unwrap();
        assert!(rep.phi_reconstruction < 1e-5, "{rep:?}");
        assert!(rep.j_crosscheck < 1e-4, "{rep:?}");
        assert!(rep.n_hi < 10.0 && rep.n_hii < 10.0, "{rep:?}");
    }

    #[test]
    fn rejects_out_of_range_exponents() {
        assert!(BernsteinKernel::new(BernsteinFamily::PowerSum(vec![1.0]), 1).is_err());
        assert!(BernsteinKernel::new(BernsteinFamily::LogPower { alpha: 0.5, beta: 0.6 }, 1).is_err());
    }
}
