//! Calderón–Zygmund machinery on (t, x) grids (one space dimension):
//! anisotropic cylinders, maximal and sharp functions, the Whitney-type
//! decomposition and the square-function operator 𝒢.
//!
//! Cylinders are clipped to the domain [0,T]×[x_lo,x_hi]; every average uses
//! the clipped measure. Suprema over δ run over a finite radius ladder, so the
//! computed maximal functions are lower bounds of the continuous ones.

mod decompose;
mod maximal;
mod operator;

pub use decompose::{cz_decompose, good_lambda_check, CzDecomposition, CzPart, GoodLambdaReport, WhitneyFactors};
pub use maximal::{
    double_average, fefferman_stein_ratio, maximal, mean_oscillation, sandwich_constant, sharp, sharp_natural,
    weak_type_constant, Mode, RadiusLadder, DEFAULT_RADII,
};
pub use operator::{
    apply_g, l2_multiplier_bound, spectral_kernel, verify_stoch_hormander_lp, HormanderLpReport, HormanderLpRow, LagKernel,
};

use rand::Rng;

use crate::error::{invalid, Result};
use crate::scaling::ScalingTriple;

/// Q_δ(t,x) = (t − κ(δ), t + κ(δ)) × B_δ(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub t: f64,
    pub x: [f64; 2],
    pub delta: f64,
    pub half_time: f64,
    pub dim: usize,
}

impl Cylinder {
    pub fn new(t: f64, x: [f64; 2], delta: f64, kappa: &ScalingTriple, dim: usize) -> Result<Self> {
        if !(delta > 0.0) || !(1..=2).contains(&dim) {
            return invalid("cylinder needs delta > 0 and d in {1, 2}");
        }
        Ok(Self { t, x, delta, half_time: kappa.kappa(delta), dim })
    }

    /// Q_δ(0).
    pub fn at_origin(delta: f64, kappa: &ScalingTriple, dim: usize) -> Result<Self> {
        Self::new(0.0, [0.0; 2], delta, kappa, dim)
    }

    /// c₀κ(δ)δ^d with c₀ = 2|B₁|.
    pub fn volume(&self) -> f64 {
        let ball = if self.dim == 1 { 2.0 } else { std::f64::consts::PI };
        2.0 * self.half_time * ball * self.delta.powi(self.dim as i32)
    }

    /// Whether the time slice at `t` meets the cylinder.
    pub fn meets_slice(&self, t: f64) -> bool {
        (t - self.t).abs() < self.half_time
    }

    pub fn contains(&self, t: f64, x: [f64; 2]) -> bool {
        let r2 = (x[0] - self.x[0]).powi(2) + if self.dim == 2 { (x[1] - self.x[1]).powi(2) } else { 0.0 };
        self.meets_slice(t) && r2 < self.delta * self.delta
    }
}

/// Cell-centred grid on [0, T] × [x_lo, x_hi]; node (i, j) sits at
/// ((i + ½)Δt, x_lo + (j + ½)Δx). Data are stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    nt: usize,
    nx: usize,
    horizon: f64,
    x_lo: f64,
    x_hi: f64,
}

impl SpaceTimeGrid {
    pub fn new(nt: usize, nx: usize, horizon: f64, x_lo: f64, x_hi: f64) -> Result<Self> {
        if nt == 0 || nx == 0 || !(horizon > 0.0) || !(x_hi > x_lo) {
            return invalid("space-time grid needs positive sizes and extents");
        }
        Ok(Self { nt, nx, horizon, x_lo, x_hi })
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn len(&self) -> usize {
        self.nt * self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_lo, self.x_hi)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.nx as f64
    }

    pub fn cell(&self) -> f64 {
        self.dt() * self.dx()
    }

    pub fn t(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dt()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_lo + (j as f64 + 0.5) * self.dx()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nx + j
    }

    /// Index half-widths (a, b) of Q_δ: the cells whose centres lie in the
    /// open cylinder around a node.
    pub fn half_widths(&self, delta: f64, kappa: &ScalingTriple) -> (usize, usize) {
        let open = |r: f64, h: f64| {
            let k = (r / h).ceil();
            if k <= 0.0 { 0 } else { (k as usize - 1).min(usize::MAX / 4) }
        };
        (open(kappa.kappa(delta), self.dt()).min(self.nt), open(delta, self.dx()).min(self.nx))
    }
}

/// Scalar data on a [`SpaceTimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl GridData {
    pub fn new(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("{} values for a grid of {}", values.len(), grid.len()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nt {
            for j in 0..grid.nx {
                values.push(f(grid.t(i), grid.x(j)));
            }
        }
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn integral(&self) -> f64 {
        crate::quad::pairwise_sum(&self.values) * self.grid.cell()
    }

    pub fn abs(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        crate::spectral::lp_norm(&self.values, self.grid.cell(), p)
    }

    /// Measure of {v > α}.
    pub fn level_measure(&self, alpha: f64) -> f64 {
        self.values.iter().filter(|&&v| v > alpha).count() as f64 * self.grid.cell()
    }

    pub fn mean(&self) -> f64 {
        crate::quad::pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }
}

/// Resolution-independent random field: a sum of `bumps` anisotropic
/// Gaussian bumps with random centres, widths and signed amplitudes.
pub fn random_field(grid: &SpaceTimeGrid, bumps: usize, signed: bool, rng: &mut impl Rng) -> GridData {
    let (x_lo, x_hi) = grid.x_range();
    let t_len = grid.horizon();
    let params: Vec<[f64; 5]> = (0..bumps)
        .map(|_| {
            let amp = rng.gen_range(0.2..1.0) * if signed && rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            [
                rng.gen_range(0.0..t_len),
                rng.gen_range(x_lo..x_hi),
                rng.gen_range(0.03..0.2) * t_len,
                rng.gen_range(0.03..0.2) * (x_hi - x_lo),
                amp,
            ]
        })
        .collect();
    GridData::from_fn(grid, |t, x| {
        params.iter().map(|[tc, xc, wt, wx, a]| a * (-((t - tc) / wt).powi(2) - ((x - xc) / wx).powi(2)).exp()).sum()
    })
}

/// Per-field constants of the CZ suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CzFieldRow {
    pub field: usize,
    /// max_α α|{ℳf > α}|/∫|f| (centred and noncentred).
    pub weak_centered: f64,
    pub weak_noncentered: f64,
    /// |f|_p / |f^♯|_p for p = 2, 4 (signed field).
    pub fs2: f64,
    pub fs4: f64,
    /// α Σ|Q^{*k}| / ∫|f| of the decomposition at α = 2·mean f.
    pub cover: f64,
    /// sup|g| / α.
    pub g_constant: f64,
    /// max |g + Σb_k − f| relative to sup|f|.
    pub reconstruction: f64,
    /// max_k |∫b_k| relative to sup|f|·|cell|.
    pub part_integral: f64,
    pub parts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CzEnsembleReport {
    pub nt: usize,
    pub nx: usize,
    pub rows: Vec<CzFieldRow>,
}

impl CzEnsembleReport {
    /// Suprema over the corpus of (weak centred, weak noncentred, FS p=2, FS p=4, cover).
    pub fn constants(&self) -> [f64; 5] {
        let sup = |f: fn(&CzFieldRow) -> f64| self.rows.iter().map(f).fold(0.0, f64::max);
        [sup(|r| r.weak_centered), sup(|r| r.weak_noncentered), sup(|r| r.fs2), sup(|r| r.fs4), sup(|r| r.cover)]
    }

    /// Largest ratio between corresponding corpus constants of two reports.
    pub fn variation(&self, other: &CzEnsembleReport) -> f64 {
        self.constants().iter().zip(other.constants()).map(|(a, b)| a.max(b) / a.min(b)).fold(1.0, f64::max)
    }
}

/// Run the CZ constants over `fields` random fields (stream i of `seed` for
/// field i, so the same continuous fields are drawn at every resolution).
pub fn cz_ensemble(grid: &SpaceTimeGrid, kappa: &ScalingTriple, fields: usize, seed: u64) -> Result<CzEnsembleReport> {
    use rayon::prelude::*;
    let ladder = RadiusLadder::new(grid, kappa, DEFAULT_RADII)?;
    let rows = (0..fields)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::jump_noise::path_rng(seed, i as u64);
            let f = random_field(grid, 6, false, &mut rng);
            let h = random_field(grid, 6, true, &mut rng);
            let mean = f.mean();
            let alphas: Vec<f64> = (0..6).map(|k| mean * 2f64.powi(k)).collect();
            let alpha = 2.0 * mean;
            let dec = match cz_decompose(&f, alpha, &ladder, kappa, WhitneyFactors::default()) {
                Ok(d) => d,
                Err(crate::error::Error::EmptyLevelSet { .. }) => CzDecomposition::trivial(&f, alpha),
                Err(e) => return Err(e),
            };
            let sup = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let rec = dec.reconstruct();
            let reconstruction =
                rec.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / sup;
            let cell = grid.cell();
            let part_integral = dec.parts.iter().map(|p| p.integral(cell).abs()).fold(0.0, f64::max) / (sup * cell);
            Ok(CzFieldRow {
                field: i,
                weak_centered: weak_type_constant(&f, &ladder, Mode::Centered, &alphas),
                weak_noncentered: weak_type_constant(&f, &ladder, Mode::Noncentered, &alphas),
                fs2: fefferman_stein_ratio(&h, &ladder, 2.0),
                fs4: fefferman_stein_ratio(&h, &ladder, 4.0),
                cover: dec.cover_constant,
                g_constant: dec.g_constant,
                reconstruction,
                part_integral,
                parts: dec.parts.len(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(CzEnsembleReport { nt: grid.nt(), nx: grid.nx(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_contains_centre_and_has_volume() {
        let k = ScalingTriple::power(1.0).unwrap();
        let q = Cylinder::new(1.0, [0.5, 0.0], 0.25, &k, 1).unwrap();
        assert!(q.contains(1.0, [0.5, 0.0]));
        assert!(!q.contains(1.3, [0.5, 0.0]));
        assert!((q.volume() - 2.0 * 0.25 * 2.0 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn half_widths_are_open() {
        let g = SpaceTimeGrid::new(10, 10, 1.0, 0.0, 1.0).unwrap();
        let k = ScalingTriple::power(1.0).unwrap();
        assert_eq!(g.half_widths(0.1, &k), (0, 0));
        assert_eq!(g.half_widths(0.1000001, &k), (1, 1));
        assert_eq!(g.half_widths(0.25, &k), (2, 2));
    }
}
