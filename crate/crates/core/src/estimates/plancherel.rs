use crate::error::{invalid, Result};
use crate::jump_noise::{MarkSpace, TimeField};
use crate::quad::pairwise_sum;
use crate::spectral::{comparability, SymbolTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlancherelReport {
    pub lambda: f64,
    /// I = ∫₀^T∫∫₀^{t−ε} e^{2(Re ψ^π − λ)(t−s)}|ψ^μ||Φ̂|²_{V₂} ds dξ dt.
    pub integral: f64,
    /// ∫₀^T∫|Φ|²_{V₂} dx ds.
    pub norm: f64,
    /// integral / norm.
    pub constant: f64,
    /// sup_ξ |ψ^μ| / (2(λ − Re ψ^π)), the exact bound on the time integral.
    pub bound: f64,
    /// Comparability constants c₁ ≤ |ψ^π|/|ψ^μ| ≤ c₂.
    pub c1: f64,
    pub c2: f64,
}

impl PlancherelReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.constant <= self.bound + tol
    }
}

/// ∫_ε^{u} e^{2a(τ)} dτ for a ≤ 0 (a = Re ψ − λ).
fn time_weight(a: f64, eps: f64, u: f64) -> f64 {
    if u <= eps {
        0.0
    } else if a == 0.0 {
        u - eps
    } else {
        ((2.0 * a * u).exp() - (2.0 * a * eps).exp()) / (2.0 * a)
    }
}

/// ∫_ε^T ∫_ε^u e^{2aτ} dτ du (constant-in-time coefficients).
fn double_weight(a: f64, eps: f64, horizon: f64) -> f64 {
    if horizon <= eps {
        return 0.0;
    }
    if a == 0.0 {
        return 0.5 * (horizon - eps).powi(2);
    }
    let e = (2.0 * a * eps).exp();
    (((2.0 * a * horizon).exp() - e) / (2.0 * a) - (horizon - eps) * e) / (2.0 * a)
}

/// The p = 2 bound for the kernel operator by spectral quadrature: the time
/// integrals are done in closed form per frequency, the outer s-integral by
/// the trapezoid rule with `steps` steps (exact for constant Φ).
#[allow(clippy::too_many_arguments)]
pub fn plancherel_p2(
    pi: &SymbolTable,
    mu: &SymbolTable,
    phi: &TimeField,
    marks: &MarkSpace,
    lambda: f64,
    horizon: f64,
    eps: f64,
    steps: usize,
) -> Result<PlancherelReport> {
    pi.grid().check_same(mu.grid())?;
    pi.grid().check_same(phi.grid())?;
    if !(lambda >= 0.0) || !(horizon > 0.0) || !(eps >= 0.0) || steps == 0 || phi.channels() != marks.len() {
        return invalid("plancherel bound needs lambda >= 0, T > 0, eps >= 0 and matching marks");
    }
    let grid = pi.grid();
    let dxi = grid.box_len().powi(grid.dim() as i32).recip();
    let a: Vec<f64> = pi.values().iter().map(|p| p.re - lambda).collect();
    let weight: Vec<f64> = mu.values().iter().map(|m| m.norm()).collect();
    let energy = |t: f64| -> Vec<f64> {
        let mut e = vec![0.0; grid.len()];
        for (c, m) in phi.spectra_at(t).iter().zip(marks.masses()) {
            for (acc, v) in e.iter_mut().zip(c) {
                *acc += m * v.norm_sqr();
            }
        }
        e
    };
    let (integral, norm) = if phi.is_constant() || phi.is_zero() {
        let e = energy(0.0);
        let i: Vec<f64> = (0..grid.len()).map(|k| weight[k] * e[k] * double_weight(a[k], eps, horizon)).collect();
        (pairwise_sum(&i) * dxi, pairwise_sum(&e) * dxi * horizon)
    } else {
        let h = horizon / steps as f64;
        let mut is = Vec::with_capacity(steps + 1);
        let mut ns = Vec::with_capacity(steps + 1);
        for j in 0..=steps {
            let s = j as f64 * h;
            let w = if j == 0 || j == steps { 0.5 * h } else { h };
            let e = energy(s);
            let i: Vec<f64> = (0..grid.len()).map(|k| weight[k] * e[k] * time_weight(a[k], eps, horizon - s)).collect();
            is.push(w * pairwise_sum(&i) * dxi);
            ns.push(w * pairwise_sum(&e) * dxi);
        }
        (pairwise_sum(&is), pairwise_sum(&ns))
    };
    let bound = (0..grid.len())
        .filter(|&k| weight[k] > 0.0)
        .map(|k| weight[k] / (2.0 * (-a[k])))
        .fold(0.0, f64::max);
    let (c1, c2) = comparability(pi, mu)?;
    let constant = if norm > 0.0 { integral / norm } else { 0.0 };
    Ok(PlancherelReport { lambda, integral, norm, constant, bound, c1, c2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_spaces::Field;
    use crate::spectral::{FrequencyGrid, GridFunction};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn setup() -> (SymbolTable, TimeField, MarkSpace) {
        let g = FrequencyGrid::new(1, 256, 32.0).unwrap();
        let tab = SymbolTable::from_fn(&g, |xi| Complex64::new(-2.0 * PI * PI * xi[0].abs(), 0.0));
        let marks = MarkSpace::new(vec![1.5]).unwrap();
        let h = GridFunction::from_fn(&g, |x| (-PI * x[0] * x[0]).exp());
        let phi = TimeField::constant(&Field::new(marks.value_space(2.0).unwrap(), vec![h]).unwrap());
        (tab, phi, marks)
    }

    #[test]
    fn equal_measures_give_at_most_one_half() {
        let (tab, phi, marks) = setup();
        let r = plancherel_p2(&tab, &tab, &phi, &marks, 0.0, 2.0, 0.0, 1).unwrap();
        assert!((r.bound - 0.5).abs() < 1e-12);
        assert!(r.constant <= 0.5 + 1e-6 && r.constant > 0.3, "{r:?}");
    }

    #[test]
    fn closed_form_matches_trapezoid() {
        let (tab, phi, marks) = setup();
        let g = tab.grid().clone();
        let h = phi.channel_values(0.0);
        let tf = TimeField::from_fn(&g, 1, move |_| h.clone());
        let a = plancherel_p2(&tab, &tab, &phi, &marks, 1.0, 1.0, 0.01, 1).unwrap();
        let b = plancherel_p2(&tab, &tab, &tf, &marks, 1.0, 1.0, 0.01, 2000).unwrap();
        assert!((a.integral - b.integral).abs() < 1e-5 * a.integral, "{} {}", a.integral, b.integral);
    }

    #[test]
    fn decays_like_one_over_lambda() {
        let (tab, phi, marks) = setup();
        let i1 = plancherel_p2(&tab, &tab, &phi, &marks, 1e3, 1.0, 0.0, 1).unwrap().integral;
        let i2 = plancherel_p2(&tab, &tab, &phi, &marks, 1e4, 1.0, 0.0, 1).unwrap().integral;
        assert!((i1 / i2 - 10.0).abs() < 0.5, "{}", i1 / i2);
    }
}
