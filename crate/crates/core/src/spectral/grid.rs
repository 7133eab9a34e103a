//! Periodic grids and the discrete Fourier pair.
//!
//! Convention: 𝓕h(ξ) = ∫ e^{−i2πξ·x} h(x) dx. On an n^d grid with period L,
//! index j ↔ k = j (j < n/2) or j − n (j ≥ n/2), with x_j = kL/n and
//! ξ_j = k/L. The forward transform is the unnormalised DFT times Δx^d, the
//! inverse is the unnormalised inverse DFT divided by L^d. The Nyquist index
//! n/2 maps to ξ = −n/(2L) and has no partner on the grid.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

#[derive(Clone)]
pub struct FrequencyGrid {
    d: usize,
    n: usize,
    box_len: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrequencyGrid(d={}, n={}, L={})", self.d, self.n, self.box_len)
    }
}

impl PartialEq for FrequencyGrid {
    fn eq(&self, o: &Self) -> bool {
        self.d == o.d && self.n == o.n && self.box_len == o.box_len
    }
}

impl FrequencyGrid {
    pub fn new(d: usize, n: usize, box_len: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return invalid(format!("grid dimension must be 1 or 2, got {d}"));
        }
        if n < 4 || !n.is_power_of_two() {
            return invalid(format!("points per axis must be a power of two >= 4, got {n}"));
        }
        if !(box_len > 0.0 && box_len.is_finite()) {
            return invalid(format!("box length must be positive, got {box_len}"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self { d, n, box_len, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
    }

    /// Same geometry with a different period.
    pub fn with_box(&self, box_len: f64) -> Result<Self> {
        if !(box_len > 0.0 && box_len.is_finite()) {
            return invalid(format!("box length must be positive, got {box_len}"));
        }
        Ok(Self { box_len, ..self.clone() })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn cell(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.box_len)
    }

    /// Signed wavenumber of axis index j.
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    fn axes(&self, idx: usize) -> (usize, usize) {
        if self.d == 1 {
            (idx, 0)
        } else {
            (idx % self.n, idx / self.n)
        }
    }

    pub fn index(&self, j0: usize, j1: usize) -> usize {
        if self.d == 1 {
            j0
        } else {
            j1 * self.n + j0
        }
    }

    pub fn xi(&self, idx: usize) -> [f64; 2] {
        let (a, b) = self.axes(idx);
        let s = 1.0 / self.box_len;
        if self.d == 1 {
            [self.wavenumber(a) as f64 * s, 0.0]
        } else {
            [self.wavenumber(a) as f64 * s, self.wavenumber(b) as f64 * s]
        }
    }

    pub fn x(&self, idx: usize) -> [f64; 2] {
        let (a, b) = self.axes(idx);
        let h = self.dx();
        if self.d == 1 {
            [self.wavenumber(a) as f64 * h, 0.0]
        } else {
            [self.wavenumber(a) as f64 * h, self.wavenumber(b) as f64 * h]
        }
    }

    pub fn norm_x(&self, idx: usize) -> f64 {
        let x = self.x(idx);
        x[0].hypot(x[1])
    }

    pub fn norm_xi(&self, idx: usize) -> f64 {
        let x = self.xi(idx);
        x[0].hypot(x[1])
    }

    /// Index of −ξ (Nyquist components map to themselves).
    pub fn partner(&self, idx: usize) -> usize {
        let (a, b) = self.axes(idx);
        let m = |j: usize| (self.n - j) % self.n;
        self.index(m(a), m(b))
    }

    /// True when some axis sits at the unpaired Nyquist index.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let (a, b) = self.axes(idx);
        a == self.n / 2 || (self.d == 2 && b == self.n / 2)
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        if self.d == 1 {
            plan.process(data);
            return;
        }
        for row in data.chunks_exact_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            plan.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }

    /// In-place forward transform including the Δx^d factor.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
        let c = self.cell();
        data.iter_mut().for_each(|v| *v *= c);
    }

    /// In-place inverse transform including the 1/L^d factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let c = self.box_len.powi(self.d as i32).recip();
        data.iter_mut().for_each(|v| *v *= c);
    }

    pub(crate) fn check_same(&self, other: &FrequencyGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Real samples on the space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: FrequencyGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} samples for {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &FrequencyGrid) -> Self {
        Self { values: vec![0.0; grid.len()], grid: grid.clone() }
    }

    pub fn from_fn(grid: &FrequencyGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn fft(&self) -> Spectrum {
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.forward(&mut data);
        Spectrum { grid: self.grid.clone(), values: data }
    }

    /// Riemann sum ∫ f dx over the box.
    pub fn integral(&self) -> f64 {
        crate::quad::pairwise_sum(&self.values) * self.grid.cell()
    }

    /// Discrete L_p norm (Riemann sum with the cell volume).
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, self.grid.cell(), p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn add(&self, o: &GridFunction) -> Result<Self> {
        self.grid.check_same(&o.grid)?;
        Ok(Self { grid: self.grid.clone(), values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, o: &GridFunction) -> Result<Self> {
        self.add(&o.scaled(-1.0))
    }
}

/// Discrete L_p norm of samples with cell volume `cell`.
pub fn lp_norm(values: &[f64], cell: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let terms: Vec<f64> = values.iter().map(|v| abs_pow(*v, p)).collect();
    (crate::quad::pairwise_sum(&terms) * cell).powf(1.0 / p)
}

/// |v|^p with exact fast paths for the common exponents.
pub fn abs_pow(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if p == 2.0 {
        a * a
    } else if p == 1.0 {
        a
    } else if p == 4.0 {
        (a * a) * (a * a)
    } else if p == 3.0 {
        a * a * a
    } else if p == 1.5 {
        a * a.sqrt()
    } else {
        a.powf(p)
    }
}

/// Fourier coefficients on the frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} coefficients for {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &FrequencyGrid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.xi(i))).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn from_fn_indexed(grid: &FrequencyGrid, f: impl Fn(usize) -> Complex64) -> Self {
        Self { grid: grid.clone(), values: (0..grid.len()).map(f).collect() }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Real part of the inverse transform.
    pub fn ifft(&self) -> GridFunction {
        let mut data = self.values.clone();
        self.grid.inverse(&mut data);
        GridFunction { grid: self.grid.clone(), values: data.iter().map(|v| v.re).collect() }
    }

    pub fn ifft_complex(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        self.grid.inverse(&mut data);
        data
    }

    pub fn mul(&self, m: &[Complex64]) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().zip(m).map(|(a, b)| a * b).collect() }
    }

    pub fn mul_real(&self, m: &[f64]) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().zip(m).map(|(a, b)| a * b).collect() }
    }

    /// Spectral derivative D^k along the first axis: multiplier (i2πξ₁)^k.
    pub fn derivative(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        let m: Vec<Complex64> = (0..self.grid.len())
            .map(|i| {
                if self.grid.is_nyquist(i) && k % 2 == 1 {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(0.0, 2.0 * std::f64::consts::PI * self.grid.xi(i)[0]).powu(k)
            })
            .collect();
        self.mul(&m)
    }

    /// Translation h(x) ↦ h(x − y): multiplier e^{−i2πξ·y}.
    pub fn shifted(&self, y: [f64; 2]) -> Self {
        let m: Vec<Complex64> = (0..self.grid.len())
            .map(|i| {
                let xi = self.grid.xi(i);
                Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (xi[0] * y[0] + xi[1] * y[1]))
            })
            .collect();
        self.mul(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_fourier_pair() {
        // e^{−πx²} is its own transform under this convention.
        let g = FrequencyGrid::new(1, 256, 16.0).unwrap();
        let f = GridFunction::from_fn(&g, |x| (-std::f64::consts::PI * x[0] * x[0]).exp());
        let s = f.fft();
        for i in 0..g.len() {
            let xi = g.xi(i)[0];
            let want = (-std::f64::consts::PI * xi * xi).exp();
            assert!((s.values()[i] - Complex64::new(want, 0.0)).norm() < 1e-13, "{i}");
        }
    }

    #[test]
    fn planar_round_trip() {
        let g = FrequencyGrid::new(2, 32, 5.0).unwrap();
        let f = GridFunction::from_fn(&g, |x| (x[0] - 0.3 * x[1]).sin() + (-x[0] * x[0]).exp());
        let back = f.fft().ifft();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12 * f.sup_norm());
        }
    }

    #[test]
    fn partner_negates_frequency() {
        let g = FrequencyGrid::new(2, 8, 1.0).unwrap();
        for i in 0..g.len() {
            let (a, b) = (g.xi(i), g.xi(g.partner(i)));
            if !g.is_nyquist(i) {
                assert_eq!([a[0], a[1]], [-b[0], -b[1]]);
            }
        }
    }
}
