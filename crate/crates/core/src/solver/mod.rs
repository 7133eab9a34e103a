//! Mild solution u = T^λ_t g + R_λ f + R̃_λ Φ of du = (L^π u − λu + f)dt + ∫Φ q(dt,dz)
//! on a periodic grid, and the residual of its integral form.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::jump_noise::{
    evolve, stochastic_integral, EventGrid, JumpPath, MarkSpace, Node, NodeKind, Series, Smoothing, Source, TimeField,
};
use crate::levy_measure::LevyMeasure;
use crate::quad::fit_slope;
use crate::spectral::{lp_norm, FrequencyGrid, GridFunction, Spectrum, SymbolTable};

/// Default number of uniform steps on [0, T].
pub const DEFAULT_STEPS: usize = 512;

/// One problem instance: generator symbol, reference symbol, data and marks.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub pi: SymbolTable,
    pub mu: SymbolTable,
    pub lambda: f64,
    pub horizon: f64,
    pub steps: usize,
    pub g: GridFunction,
    /// Single-channel forcing.
    pub f: TimeField,
    pub phi: TimeField,
    pub marks: MarkSpace,
    pub p: f64,
    pub s: f64,
}

impl ProblemSpec {
    /// Homogeneous problem (f = 0, Φ = 0) for the given measures on `grid`.
    pub fn new(pi: &LevyMeasure, mu: &LevyMeasure, grid: &FrequencyGrid, lambda: f64, horizon: f64) -> Result<Self> {
        let pi = SymbolTable::eval(pi, grid)?;
        let mu = SymbolTable::eval(mu, grid)?;
        Self::from_tables(pi, mu, lambda, horizon)
    }

    pub fn from_tables(pi: SymbolTable, mu: SymbolTable, lambda: f64, horizon: f64) -> Result<Self> {
        pi.grid().check_same(mu.grid())?;
        let grid = pi.grid().clone();
        let spec = Self {
            g: GridFunction::zeros(&grid),
            f: TimeField::zero(&grid, 1),
            phi: TimeField::zero(&grid, 0),
            marks: MarkSpace::new(vec![])?,
            pi,
            mu,
            lambda,
            horizon,
            steps: DEFAULT_STEPS,
            p: 2.0,
            s: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.pi.grid()
    }

    pub fn with_g(mut self, g: GridFunction) -> Self {
        self.g = g;
        self
    }

    pub fn with_f(mut self, f: TimeField) -> Self {
        self.f = f;
        self
    }

    pub fn with_noise(mut self, phi: TimeField, marks: MarkSpace) -> Self {
        self.phi = phi;
        self.marks = marks;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_norm(mut self, p: f64, s: f64) -> Self {
        self.p = p;
        self.s = s;
        self
    }

    /// Multiply g, f and Φ by c.
    pub fn scaled_inputs(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.g = self.g.scaled(c);
        out.f = self.f.scaled(c);
        out.phi = self.phi.scaled(c);
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.horizon > 0.0) || self.steps == 0 {
            return invalid("problem needs lambda >= 0, T > 0 and at least one step");
        }
        if !(self.p > 1.0) {
            return invalid("p must exceed 1");
        }
        let grid = self.grid();
        grid.check_same(self.mu.grid())?;
        grid.check_same(self.g.grid())?;
        grid.check_same(self.f.grid())?;
        if self.f.channels() != 1 {
            return invalid("forcing must have one channel");
        }
        if self.phi.channels() != self.marks.len() {
            return Err(Error::GridMismatch("noise channels and marks differ".into()));
        }
        if self.phi.channels() > 0 {
            grid.check_same(self.phi.grid())?;
        }
        Ok(())
    }

    fn generator(&self) -> Vec<Complex64> {
        self.pi.values().iter().map(|p| p - self.lambda).collect()
    }
}

/// T^λ_t g = e^{−λt} E g(· + Z_t): multiplier e^{(ψ−λ)t}; t = 0 returns g.
pub fn semigroup_apply(g: &GridFunction, t: f64, lambda: f64, pi: &SymbolTable) -> Result<GridFunction> {
    if !(t >= 0.0) {
        return invalid("semigroup time must be nonnegative");
    }
    pi.grid().check_same(g.grid())?;
    if t == 0.0 {
        return Ok(g.clone());
    }
    let m: Vec<Complex64> = pi.values().iter().map(|p| ((p - lambda) * t).exp()).collect();
    Ok(g.fft().mul(&m).ifft())
}

/// R_λ f(t) by the exponential trapezoid rule with `steps` uniform steps on [0, t].
pub fn duhamel_apply(f: &TimeField, t: f64, lambda: f64, pi: &SymbolTable, steps: usize) -> Result<GridFunction> {
    pi.grid().check_same(f.grid())?;
    if t == 0.0 {
        return Ok(GridFunction::zeros(f.grid()));
    }
    let ev = EventGrid::new(t, steps, None)?;
    let a = Smoothing::Semigroup(pi).generator(f.grid(), lambda)?;
    let s = evolve(&ev, &a, None, Some(&Source { field: f, weights: vec![1.0] }), None, &|n| {
        n.kind == NodeKind::Uniform(steps)
    })?;
    Ok(s.last_value())
}

/// The three components and their sum, recorded at every node of the event grid.
#[derive(Debug, Clone)]
pub struct Solution {
    pub homogeneous: Series,
    pub duhamel: Series,
    pub noise: Series,
    pub total: Series,
}

impl Solution {
    pub fn nodes(&self) -> &[Node] {
        self.total.nodes()
    }
}

/// Solve along one path. Each component is computed separately on the
/// event-adapted grid (homogeneous part exactly, the others by the
/// exponential trapezoid rule with exact jumps).
pub fn solve(spec: &ProblemSpec, path: &JumpPath) -> Result<Solution> {
    spec.validate()?;
    if path.horizon != spec.horizon {
        return invalid("path horizon differs from the problem horizon");
    }
    let ev = EventGrid::new(spec.horizon, spec.steps, Some(path))?;
    let a = spec.generator();
    let ghat = spec.g.fft();
    let homogeneous = Series::new(
        spec.grid(),
        ev.nodes().to_vec(),
        ev.nodes().iter().map(|n| ghat.values().iter().zip(&a).map(|(g, z)| g * (z * n.t).exp()).collect()).collect(),
    );
    let duhamel = evolve(&ev, &a, None, Some(&Source { field: &spec.f, weights: vec![1.0] }), None, &|_| true)?;
    let noise = if spec.marks.is_empty() {
        Series::new(spec.grid(), ev.nodes().to_vec(), vec![vec![Complex64::new(0.0, 0.0); spec.grid().len()]; ev.nodes().len()])
    } else {
        stochastic_integral(&spec.phi, &spec.marks, path, spec.lambda, Smoothing::Semigroup(&spec.pi), spec.steps, &|_| true)?
    };
    let total = homogeneous.add(&duhamel)?.add(&noise)?;
    Ok(Solution { homogeneous, duhamel, noise, total })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub times: Vec<f64>,
    /// |u(t) − [g + ∫₀^t(L^π u − λu + f)ds + ∫₀^t∫Φ q]|_{L_p} per node.
    pub residuals: Vec<f64>,
    pub max: f64,
}

/// Residual of the integral form, with the time integral by the trapezoid
/// rule on the event grid (left limits used at jumps).
pub fn residual_check(sol: &Solution, spec: &ProblemSpec, path: &JumpPath) -> Result<ResidualReport> {
    let u = &sol.total;
    let n = spec.grid().len();
    let a = spec.generator();
    let masses = spec.marks.masses();
    let drift = |i: usize, t: f64| -> Vec<Complex64> {
        let fhat = spec.f.spectra_at(t).remove(0);
        let mut out: Vec<Complex64> = u.spectral_values(i).iter().zip(&a).zip(&fhat).map(|((u, a), f)| a * u + f).collect();
        if !masses.is_empty() {
            let phis = spec.phi.spectra_at(t);
            for (c, m) in phis.iter().zip(masses) {
                for (o, v) in out.iter_mut().zip(c) {
                    *o -= m * v;
                }
            }
        }
        out
    };
    let ghat = spec.g.fft();
    let mut rhs: Vec<Complex64> = ghat.values().to_vec();
    let mut prev = drift(0, 0.0);
    let mut prev_t = 0.0;
    let (mut times, mut residuals) = (Vec::new(), Vec::new());
    for (i, node) in u.nodes().iter().enumerate() {
        if i > 0 && node.t > prev_t {
            let cur = drift(i, node.t);
            let h = node.t - prev_t;
            for k in 0..n {
                rhs[k] += 0.5 * h * (prev[k] + cur[k]);
            }
            prev = cur;
            prev_t = node.t;
        }
        if let NodeKind::PostJump(k) = node.kind {
            let e = path.events[k];
            let jump = spec.phi.spectra_at(e.t).swap_remove(e.mark);
            for (r, j) in rhs.iter_mut().zip(&jump) {
                *r += j;
            }
            // The drift restarts from the post-jump state.
            prev = drift(i, node.t);
        }
        let diff: Vec<Complex64> = u.spectral_values(i).iter().zip(&rhs).map(|(x, y)| x - y).collect();
        let d = Spectrum::new(spec.grid().clone(), diff)?.ifft();
        times.push(node.t);
        residuals.push(lp_norm(d.values(), spec.grid().cell(), spec.p));
    }
    let max = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(ResidualReport { times, residuals, max })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub steps: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Fitted order: −slope of log residual against log Δt.
    pub order: f64,
}

/// Residual maxima for several step counts on the same path, and the
/// fitted convergence order.
pub fn residual_order(spec: &ProblemSpec, path: &JumpPath, steps: &[usize]) -> Result<OrderReport> {
    let mut residuals = Vec::with_capacity(steps.len());
    for &k in steps {
        let s = spec.clone().with_steps(k);
        let sol = solve(&s, path)?;
        residuals.push(residual_check(&sol, &s, path)?.max);
    }
    let x: Vec<f64> = steps.iter().map(|&k| (spec.horizon / k as f64).ln()).collect();
    let y: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    Ok(OrderReport { steps: steps.to_vec(), residuals, order: fit_slope(&x, &y) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_spaces::Field;
    use crate::jump_noise::sample_path;
    use std::f64::consts::PI;

    fn cauchy_spec(n: usize) -> ProblemSpec {
        let g = FrequencyGrid::new(1, n, 16.0).unwrap();
        let c = LevyMeasure::stable(1, 1.0).unwrap();
        ProblemSpec::new(&c, &c, &g, 0.5, 1.0).unwrap()
    }

    fn bump(g: &FrequencyGrid, c: f64) -> GridFunction {
        GridFunction::from_fn(g, move |x| (-PI * (x[0] - c).powi(2)).exp())
    }

    #[test]
    fn semigroup_identity_at_zero_and_mass() {
        let spec = cauchy_spec(256);
        let g = bump(spec.grid(), 0.0);
        assert_eq!(semigroup_apply(&g, 0.0, 1.0, &spec.pi).unwrap(), g);
        let tg = semigroup_apply(&g, 0.7, 0.0, &spec.pi).unwrap();
        assert!((tg.integral() - g.integral()).abs() < 1e-10);
    }

    #[test]
    fn duhamel_scalar_ode() {
        let spec = cauchy_spec(64);
        let one = TimeField::scalar_constant(&GridFunction::from_fn(spec.grid(), |_| 2.0));
        let r = duhamel_apply(&one, 1.5, 4.0, &spec.pi, 512).unwrap();
        let want = 2.0 * (1.0 - (-6.0f64).exp()) / 4.0;
        assert!(r.values().iter().all(|v| (v - want).abs() < 1e-4 * want));
    }

    #[test]
    fn components_and_initial_condition() {
        let spec = cauchy_spec(128);
        let g = bump(spec.grid(), 0.0);
        let marks = MarkSpace::new(vec![2.0]).unwrap();
        let space = marks.value_space(2.0).unwrap();
        let phi = TimeField::constant(&Field::new(space, vec![bump(spec.grid(), 1.0)]).unwrap());
        let spec = spec.with_g(g.clone()).with_noise(phi.clone(), marks.clone()).with_steps(64);
        let path = sample_path(&marks, 1.0, 4).unwrap();
        let sol = solve(&spec, &path).unwrap();
        assert!(sol.total.value(0).sub(&g).unwrap().sup_norm() < 1e-15);
        let m = stochastic_integral(&phi, &marks, &path, spec.lambda, Smoothing::Semigroup(&spec.pi), 64, &|_| true).unwrap();
        assert_eq!(m, sol.noise);
    }

    #[test]
    fn residual_zero_for_zero_data() {
        let spec = cauchy_spec(64).with_steps(16);
        let path = sample_path(&MarkSpace::new(vec![]).unwrap(), 1.0, 0).unwrap();
        let sol = solve(&spec, &path).unwrap();
        assert_eq!(residual_check(&sol, &spec, &path).unwrap().max, 0.0);
    }

    #[test]
    fn residual_is_second_order() {
        let spec = cauchy_spec(128);
        let grid = spec.grid().clone();
        let marks = MarkSpace::new(vec![1.0, 2.0]).unwrap();
        let space = marks.value_space(2.0).unwrap();
        let phi = TimeField::constant(&Field::new(space, vec![bump(&grid, 1.0), bump(&grid, -2.0).scaled(0.5)]).unwrap());
        let gf = bump(&grid, 0.5);
        let f = TimeField::from_fn(&grid, 1, move |t| vec![gf.scaled((2.0 * PI * t).cos())]);
        let spec = spec.with_g(bump(&grid, 0.0)).with_f(f).with_noise(phi, marks.clone());
        let path = sample_path(&marks, 1.0, 21).unwrap();
        let r = residual_order(&spec, &path, &[64, 128, 256, 512]).unwrap();
        assert!(r.order >= 1.8, "{r:?}");
    }
}
