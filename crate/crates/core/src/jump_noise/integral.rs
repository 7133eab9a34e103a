use rayon::prelude::*;

use super::series::{evolve, EventGrid, Node, NodeKind, Series, Smoothing, Source, TimeField};
use super::{sample_path_indexed, JumpPath, MarkSpace};
use crate::error::{invalid, Error, Result};
use crate::function_spaces::Field;
use crate::quad::pairwise_sum;
use crate::spectral::{lp_norm, SymbolTable};

fn check_marks(phi: &TimeField, marks: &MarkSpace) -> Result<()> {
    if phi.channels() != marks.len() {
        return Err(Error::GridMismatch(format!("{} coefficient channels for {} marks", phi.channels(), marks.len())));
    }
    Ok(())
}

/// M(t) = ∫₀^t e^{−λ(t−s)} P_{t−s} Φ(s, ·, z) q(ds, dz) on the event grid of
/// `path` with `steps` uniform steps: jumps add Φ̂(t_k, z_k) exactly, the
/// compensator −Σ_i Π_i Φ_i is integrated by the exponential trapezoid rule.
pub fn stochastic_integral(
    phi: &TimeField,
    marks: &MarkSpace,
    path: &JumpPath,
    lambda: f64,
    smoothing: Smoothing<'_>,
    steps: usize,
    keep: &dyn Fn(&Node) -> bool,
) -> Result<Series> {
    check_marks(phi, marks)?;
    if !(lambda >= 0.0) {
        return invalid("lambda must be nonnegative");
    }
    let ev = EventGrid::new(path.horizon, steps, Some(path))?;
    let a = smoothing.generator(phi.grid(), lambda)?;
    let weights = marks.masses().iter().map(|m| -m).collect();
    evolve(&ev, &a, None, Some(&Source { field: phi, weights }), Some((path, phi)), keep)
}

pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = if xs.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryReport {
    pub n_paths: usize,
    /// Monte Carlo mean of |M(T)|²_{L₂}.
    pub mean: f64,
    pub std_error: f64,
    /// T·Σ_i Π_i |h_i|²_{L₂}.
    pub exact: f64,
    pub z_score: f64,
}

/// Itô isometry for a time-constant Φ = h without smoothing and λ = 0.
pub fn ito_isometry_check(h: &Field, marks: &MarkSpace, horizon: f64, n_paths: usize, seed: u64, steps: usize) -> Result<IsometryReport> {
    if n_paths < 2 {
        return invalid("need at least two paths");
    }
    let phi = TimeField::constant(h);
    check_marks(&phi, marks)?;
    let samples: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_path_indexed(marks, horizon, seed, i)?;
            let m = stochastic_integral(&phi, marks, &path, 0.0, Smoothing::Identity, steps, &|n| {
                n.kind == NodeKind::Uniform(steps)
            })?;
            Ok(m.last_value().lp_norm(2.0).powi(2))
        })
        .collect::<Result<_>>()?;
    let (mean, std_error) = mean_se(&samples);
    let exact = horizon
        * h.channels().iter().zip(marks.masses()).map(|(c, m)| m * c.lp_norm(2.0).powi(2)).sum::<f64>();
    Ok(IsometryReport { n_paths, mean, std_error, exact, z_score: (mean - exact) / std_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationReport {
    pub n_paths: usize,
    /// max over grid points of |mean M(T,x)| / standard error.
    pub max_abs_z: f64,
    /// Fraction of grid points with |z| > 3.
    pub outside_3se: f64,
}

/// E M(T, x) = 0 at every grid point, tested with per-point z-scores.
#[allow(clippy::too_many_arguments)]
pub fn compensation_check(
    phi: &TimeField,
    marks: &MarkSpace,
    horizon: f64,
    lambda: f64,
    smoothing: Smoothing<'_>,
    n_paths: usize,
    seed: u64,
    steps: usize,
) -> Result<CompensationReport> {
    let finals: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_path_indexed(marks, horizon, seed, i)?;
            let m = stochastic_integral(phi, marks, &path, lambda, smoothing, steps, &|n| n.kind == NodeKind::Uniform(steps))?;
            Ok(m.last_value().into_values())
        })
        .collect::<Result<_>>()?;
    let npts = phi.grid().len();
    let (mut worst, mut outside) = (0.0f64, 0usize);
    let mut col = vec![0.0; n_paths];
    for x in 0..npts {
        for (c, f) in col.iter_mut().zip(&finals) {
            *c = f[x];
        }
        let (m, se) = mean_se(&col);
        if se > 0.0 {
            let z = (m / se).abs();
            worst = worst.max(z);
            if z > 3.0 {
                outside += 1;
            }
        }
    }
    Ok(CompensationReport { n_paths, max_abs_z: worst, outside_3se: outside as f64 / npts as f64 })
}

/// Inputs of [`moment_estimate_check`].
#[derive(Clone)]
pub struct MomentSetup<'a> {
    pub phi: &'a TimeField,
    pub marks: &'a MarkSpace,
    pub mu: &'a SymbolTable,
    pub smoothing: Smoothing<'a>,
    pub lambda: f64,
    pub horizon: f64,
    pub steps: usize,
    pub s: f64,
    pub p: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Uniform nodes used for sup_t and time integrals (every `stride`-th).
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub p: f64,
    pub lambda: f64,
    pub n_paths: usize,
    /// E sup_t |M(t)|_{H_p^s}.
    pub lhs: f64,
    pub lhs_se: f64,
    /// Σ_{j ∈ {2,p}} |Φ|_{H^s_{j,p}(E)} (only j = p when p < 2).
    pub rhs: f64,
    pub constant: f64,
    /// E ∫₀^T |M(t)|^p_{H_p^s} dt.
    pub lp_lhs: f64,
    pub lp_lhs_se: f64,
    /// ρ^{p/2}|Φ|^p_{H_{2,p}} + ρ|Φ|^p_{H_{p,p}} (only the second term when p < 2).
    pub lp_rhs: f64,
    pub lp_constant: f64,
    pub rho: f64,
}

/// ∫₀^T |J^sΦ(t)|^p_{L_p(V_r)} dt by the trapezoid rule on uniform steps.
pub(crate) fn coefficient_norm_p(phi: &TimeField, marks: &MarkSpace, mu: &SymbolTable, s: f64, p: f64, r: f64, horizon: f64, steps: usize) -> Result<f64> {
    let space = marks.value_space(r)?;
    let bessel = mu.bessel(s);
    let at = |t: f64| -> Result<f64> {
        let f = phi.field_at(t, &space)?.map_multiplier(&bessel);
        Ok(f.lp_norm(p).powf(p))
    };
    if phi.is_constant() {
        return Ok(horizon * at(0.0)?);
    }
    let h = horizon / steps as f64;
    let vals: Vec<f64> = (0..=steps)
        .map(|k| at(k as f64 * h).map(|v| if k == 0 || k == steps { 0.5 * v * h } else { v * h }))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&vals))
}

/// Monte Carlo check of E sup_t|M(t)|_{H_p^s} ≤ C Σ_j |Φ|_{H^s_{j,p}(E)} and of
/// the ρ_λ-weighted L_p(E) bound for the stochastic convolution.
pub fn moment_estimate_check(m: &MomentSetup<'_>) -> Result<MomentReport> {
    if !(m.p > 1.0) || m.n_paths < 2 || m.stride == 0 {
        return invalid("moment check needs p > 1, at least two paths and a positive stride");
    }
    check_marks(m.phi, m.marks)?;
    let bessel = m.mu.bessel(m.s);
    let (p, stride, steps) = (m.p, m.stride, m.steps);
    let keep = move |n: &Node| match n.kind {
        NodeKind::Uniform(k) => k % stride == 0 || k == steps,
        NodeKind::PostJump(_) => true,
        NodeKind::PreJump(_) => false,
    };
    let cell = m.phi.grid().cell();
    let samples: Vec<(f64, f64)> = (0..m.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_path_indexed(m.marks, m.horizon, m.seed, i)?;
            let series = stochastic_integral(m.phi, m.marks, &path, m.lambda, m.smoothing, steps, &keep)?;
            let mut sup = 0.0f64;
            let mut uniform = Vec::new();
            for (k, node) in series.nodes().iter().enumerate() {
                let v = series.spectrum(k).mul_real(&bessel).ifft();
                let norm = lp_norm(v.values(), cell, p);
                sup = sup.max(norm);
                if let NodeKind::Uniform(_) = node.kind {
                    uniform.push((node.t, norm.powf(p)));
                }
            }
            let integral = pairwise_sum(&uniform.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).collect::<Vec<_>>());
            Ok((sup, integral))
        })
        .collect::<Result<_>>()?;
    let sups: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ints: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let (lhs, lhs_se) = mean_se(&sups);
    let (lp_lhs, lp_lhs_se) = mean_se(&ints);
    if lhs > 0.0 && lhs_se / lhs > 0.1 {
        return Err(Error::StatisticalPower { quantity: "E sup |M|".into(), rel_error: lhs_se / lhs, limit: 0.1 });
    }
    let norm_pp = coefficient_norm_p(m.phi, m.marks, m.mu, m.s, p, p, m.horizon, steps)?;
    let norm_2p = if p >= 2.0 { coefficient_norm_p(m.phi, m.marks, m.mu, m.s, p, 2.0, m.horizon, steps)? } else { 0.0 };
    let rhs = norm_pp.powf(1.0 / p) + if p > 2.0 { norm_2p.powf(1.0 / p) } else { 0.0 };
    let rho = if m.lambda > 0.0 { m.horizon.min(1.0 / m.lambda) } else { m.horizon };
    let lp_rhs = if p >= 2.0 { rho.powf(p / 2.0) * norm_2p + rho * norm_pp } else { rho * norm_pp };
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(MomentReport {
        p,
        lambda: m.lambda,
        n_paths: m.n_paths,
        lhs,
        lhs_se,
        rhs,
        constant: ratio(lhs, rhs),
        lp_lhs,
        lp_lhs_se,
        lp_rhs,
        lp_constant: ratio(lp_lhs, lp_rhs),
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump_noise::sample_path;
    use crate::function_spaces::ValueSpace;
    use crate::levy_measure::LevyMeasure;

    fn single_channel(mass: f64) -> Result<(MarkSpace, ValueSpace)> {
        let marks = MarkSpace::new(vec![mass])?;
        let space = marks.value_space(2.0)?;
        Ok((marks, space))
    }
    use crate::spectral::{FrequencyGrid, GridFunction};

    fn bump(g: &FrequencyGrid) -> GridFunction {
        GridFunction::from_fn(g, |x| (-std::f64::consts::PI * x[0] * x[0]).exp())
    }

    #[test]
    fn zero_coefficient_gives_zero() {
        let g = FrequencyGrid::new(1, 64, 8.0).unwrap();
        let marks = MarkSpace::new(vec![2.0]).unwrap();
        let path = sample_path(&marks, 1.0, 1).unwrap();
        let z = TimeField::zero(&g, 1);
        let m = stochastic_integral(&z, &marks, &path, 0.0, Smoothing::Identity, 16, &|_| true).unwrap();
        assert!((0..m.len()).all(|i| m.value(i).sup_norm() == 0.0));
    }

    #[test]
    fn unsmoothed_integral_is_count_minus_compensator() {
        let g = FrequencyGrid::new(1, 64, 8.0).unwrap();
        let (marks, space) = single_channel(1.5).unwrap();
        let h = Field::new(space, vec![bump(&g)]).unwrap();
        let path = sample_path(&marks, 2.0, 7).unwrap();
        let m = stochastic_integral(&TimeField::constant(&h), &marks, &path, 0.0, Smoothing::Identity, 32, &|_| true).unwrap();
        let k = path.count(0) as f64;
        let want = bump(&g).scaled(k - 1.5 * 2.0);
        assert!(m.last_value().sub(&want).unwrap().sup_norm() < 1e-12);
        // Jumps sit exactly between the stored left limit and value.
        for (i, n) in m.nodes().iter().enumerate() {
            if let NodeKind::PostJump(_) = n.kind {
                let d = m.value(i).sub(&m.value(i - 1)).unwrap();
                assert!(d.sub(&bump(&g)).unwrap().sup_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn linearity_path_by_path() {
        let g = FrequencyGrid::new(1, 64, 8.0).unwrap();
        let pi = SymbolTable::eval(&LevyMeasure::stable(1, 1.0).unwrap(), &g).unwrap();
        let marks = MarkSpace::new(vec![1.0, 0.5]).unwrap();
        let space = marks.value_space(2.0).unwrap();
        let b = bump(&g);
        let f1 = TimeField::constant(&Field::new(space.clone(), vec![b.clone(), b.scaled(2.0)]).unwrap());
        let f2 = TimeField::constant(&Field::new(space, vec![b.scaled(-1.0), b.scaled(0.25)]).unwrap());
        let path = sample_path(&marks, 1.0, 3).unwrap();
        let run = |f: &TimeField| stochastic_integral(f, &marks, &path, 1.0, Smoothing::Semigroup(&pi), 16, &|_| true).unwrap();
        let lhs = run(&f1.combine(2.0, &f2, -3.0).unwrap());
        let rhs = run(&f1).scaled(2.0).add(&run(&f2).scaled(-3.0)).unwrap();
        for i in 0..lhs.len() {
            assert!(lhs.value(i).sub(&rhs.value(i)).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn isometry_small_ensemble() {
        let g = FrequencyGrid::new(1, 32, 8.0).unwrap();
        let (marks, space) = single_channel(2.0).unwrap();
        let h = Field::new(space, vec![bump(&g)]).unwrap();
        let r = ito_isometry_check(&h, &marks, 1.0, 2000, 17, 4).unwrap();
        assert!(r.z_score.abs() < 3.0, "{r:?}");
    }
}
