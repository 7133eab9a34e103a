use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{random_field, GridData, SpaceTimeGrid};
use crate::error::{invalid, Error, Result};
use crate::estimates::HormanderReport;
use crate::function_spaces::ValueSpace;
use crate::jump_noise::path_rng;
use crate::levy_measure::LevyMeasure;
use crate::spectral::{FrequencyGrid, SymbolInterpolant, SymbolTable};

/// Translation-invariant kernel k(t − s, x − y) sampled on a
/// [`SpaceTimeGrid`]: `lags[m][o]` is the value at time lag mΔt and spatial
/// offset (o − (nx − 1))Δx. Negative time lags vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct LagKernel {
    grid: SpaceTimeGrid,
    lags: Vec<Vec<f64>>,
}

impl LagKernel {
    pub fn from_fn(grid: &SpaceTimeGrid, k: impl Fn(f64, f64) -> f64) -> Self {
        let nx = grid.nx() as isize;
        let lags = (0..grid.nt())
            .map(|m| (-(nx - 1)..nx).map(|o| k(m as f64 * grid.dt(), o as f64 * grid.dx())).collect())
            .collect();
        Self { grid: grid.clone(), lags }
    }

    pub fn zero(grid: &SpaceTimeGrid) -> Self {
        Self::from_fn(grid, |_, _| 0.0)
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn lags(&self) -> &[Vec<f64>] {
        &self.lags
    }
}

/// K(τ, z) = e^{−λτ} L^{μ;1/2} p^{π*}(τ, z) χ_{τ ≥ ε}, computed spectrally on
/// a periodic grid `pad` times wider than the data window.
pub fn spectral_kernel(
    grid: &SpaceTimeGrid,
    pi: &LevyMeasure,
    mu: &LevyMeasure,
    lambda: f64,
    eps: f64,
    pad: usize,
) -> Result<LagKernel> {
    if pi.dim() != 1 || mu.dim() != 1 {
        return invalid("space-time kernels are one-dimensional in space");
    }
    let n = (2 * grid.nx() * pad.max(1)).next_power_of_two();
    let fg = FrequencyGrid::new(1, n, n as f64 * grid.dx())?;
    let psi = SymbolTable::from_interpolant(&SymbolInterpolant::new(pi), &fg);
    let frac = SymbolTable::from_interpolant(&SymbolInterpolant::new(mu), &fg).fractional(0.5);
    let nx = grid.nx() as isize;
    let lags = (0..grid.nt())
        .map(|m| {
            let tau = m as f64 * grid.dt();
            if tau < eps || tau == 0.0 {
                return vec![0.0; (2 * nx - 1) as usize];
            }
            let mut spec: Vec<Complex64> =
                psi.values().iter().zip(&frac).map(|(p, f)| f * ((p - lambda) * tau).exp()).collect();
            fg.inverse(&mut spec);
            (-(nx - 1)..nx).map(|o| spec[o.rem_euclid(n as isize) as usize].re).collect()
        })
        .collect();
    Ok(LagKernel { grid: grid.clone(), lags })
}

struct Conv {
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Conv {
    fn new(nx: usize) -> Self {
        let size = (3 * nx).next_power_of_two();
        let mut p = FftPlanner::new();
        Self { size, fwd: p.plan_fft_forward(size), inv: p.plan_fft_inverse(size) }
    }

    /// Kernel offsets −(nx−1)..(nx−1) placed circularly.
    fn kernel(&self, k: &[f64]) -> Vec<Complex64> {
        let nx = k.len().div_ceil(2);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (o, v) in k.iter().enumerate() {
            let off = o as isize - (nx as isize - 1);
            buf[off.rem_euclid(self.size as isize) as usize] = Complex64::new(*v, 0.0);
        }
        self.fwd.process(&mut buf);
        buf
    }

    fn signal(&self, row: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (b, v) in buf.iter_mut().zip(row) {
            *b = Complex64::new(*v, 0.0);
        }
        self.fwd.process(&mut buf);
        buf
    }
}

fn hilbert_weights(space: &ValueSpace, channels: usize) -> Result<Vec<f64>> {
    match space {
        ValueSpace::Scalar if channels == 1 => Ok(vec![1.0]),
        ValueSpace::Marks { r, masses } if *r == 2.0 && masses.len() == channels => Ok(masses.clone()),
        _ => invalid("the square function needs scalar or V_2-valued data with matching channels"),
    }
}

/// (𝒢f)(t,x) = [∫ |∫ k(t − s, x − y) f(s,y) dy|²_V ds]^{1/2} by Riemann sums;
/// the spatial convolution is linear (zero padded) and done by FFT.
pub fn apply_g(k: &LagKernel, f: &[GridData], space: &ValueSpace) -> Result<GridData> {
    let grid = k.grid();
    let weights = hilbert_weights(space, f.len())?;
    if f.iter().any(|c| c.grid() != grid) {
        return Err(Error::GridMismatch("kernel and data grids differ".into()));
    }
    let (nt, nx) = (grid.nt(), grid.nx());
    let conv = Conv::new(nx);
    let khat: Vec<Vec<Complex64>> = k.lags.iter().map(|l| conv.kernel(l)).collect();
    let fhat: Vec<Vec<Vec<Complex64>>> = f
        .iter()
        .map(|c| (0..nt).map(|j| conv.signal(&c.values()[j * nx..(j + 1) * nx])).collect())
        .collect();
    let (dt, dx) = (grid.dt(), grid.dx());
    let scale = dx / conv.size as f64;
    let rows: Vec<Vec<f64>> = (0..nt)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; nx];
            let mut buf = vec![Complex64::new(0.0, 0.0); conv.size];
            for j in 0..=i {
                let kh = &khat[i - j];
                for (c, w) in fhat.iter().zip(&weights) {
                    for ((b, a), b2) in buf.iter_mut().zip(kh).zip(&c[j]) {
                        *b = a * b2;
                    }
                    conv.inv.process(&mut buf);
                    for (x, out) in acc.iter_mut().enumerate() {
                        *out += dt * w * (buf[x].re * scale).powi(2);
                    }
                }
            }
            acc.into_iter().map(f64::sqrt).collect()
        })
        .collect();
    GridData::new(grid.clone(), rows.concat())
}

/// M₀ = sup_ξ (Σ_m Δt |Δx·k̂_m(ξ)|²)^{1/2}: |𝒢f|_{L₂} ≤ M₀|f|_{L₂(V)} holds
/// exactly for the discrete operator.
pub fn l2_multiplier_bound(k: &LagKernel) -> f64 {
    let grid = k.grid();
    let conv = Conv::new(grid.nx());
    let mut sums = vec![0.0; conv.size];
    for l in &k.lags {
        for (s, v) in sums.iter_mut().zip(conv.kernel(l)) {
            *s += grid.dt() * (grid.dx() * v.norm()).powi(2);
        }
    }
    sums.into_iter().fold(0.0, f64::max).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HormanderLpRow {
    pub p: f64,
    /// sup over the first half of the corpus of |𝒢f|_p / |f|_p.
    pub a_half: f64,
    /// sup over the whole corpus.
    pub a_full: f64,
    /// a_full / a_half − 1.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HormanderLpReport {
    pub corpus: usize,
    pub m0: f64,
    pub rows: Vec<HormanderLpRow>,
}

/// Empirical A_p = sup |𝒢f|_p/|f|_p over a corpus of random fields, compared
/// between the corpus and its first half. Needs a plateaued Hörmander sweep.
pub fn verify_stoch_hormander_lp(
    k: &LagKernel,
    sweep: &HormanderReport,
    ps: &[f64],
    corpus: usize,
    seed: u64,
) -> Result<HormanderLpReport> {
    if !sweep.plateau() {
        return Err(Error::PrereqFailed(format!(
            "Hormander sweep did not plateau (variation {:.3})",
            sweep.variation()
        )));
    }
    if corpus < 2 || ps.iter().any(|p| !(*p >= 2.0)) {
        return invalid("needs a corpus of at least two fields and p >= 2");
    }
    let grid = k.grid();
    let ratios: Vec<Vec<f64>> = (0..corpus as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let f = random_field(grid, 6, true, &mut rng);
            let g = apply_g(k, std::slice::from_ref(&f), &ValueSpace::Scalar)?;
            Ok(ps.iter().map(|&p| g.lp_norm(p) / f.lp_norm(p)).collect())
        })
        .collect::<Result<_>>()?;
    let half = corpus / 2;
    let rows = ps
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            let a_half = ratios[..half].iter().map(|r| r[n]).fold(0.0, f64::max);
            let a_full = ratios.iter().map(|r| r[n]).fold(0.0, f64::max);
            HormanderLpRow { p, a_half, a_full, drift: a_full / a_half - 1.0 }
        })
        .collect();
    Ok(HormanderLpReport { corpus, m0: l2_multiplier_bound(k), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(12, 16, 1.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_kernel_gives_zero() {
        let g = grid();
        let f = random_field(&g, 3, true, &mut ChaCha8Rng::seed_from_u64(0));
        let out = apply_g(&LagKernel::zero(&g), &[f], &ValueSpace::Scalar).unwrap();
        assert!(out.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn time_delta_reduces_to_convolution() {
        let g = grid();
        let f = random_field(&g, 3, true, &mut ChaCha8Rng::seed_from_u64(1));
        let k = LagKernel::from_fn(&g, |t, z| if t == 0.0 { (-z * z).exp() / g.dt().sqrt() } else { 0.0 });
        let out = apply_g(&k, std::slice::from_ref(&f), &ValueSpace::Scalar).unwrap();
        for i in 0..g.nt() {
            for j in 0..g.nx() {
                let c: f64 = (0..g.nx()).map(|y| (-(g.x(j) - g.x(y)).powi(2)).exp() * f.at(i, y) * g.dx()).sum();
                assert!((out.at(i, j) - c.abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn l2_bound_holds() {
        let g = grid();
        let k = LagKernel::from_fn(&g, |t, z| (-(t + 0.1) * 3.0).exp() * (-(z * z) / (t + 0.05)).exp());
        let m0 = l2_multiplier_bound(&k);
        for s in 0..5 {
            let f = random_field(&g, 4, true, &mut ChaCha8Rng::seed_from_u64(s));
            let out = apply_g(&k, std::slice::from_ref(&f), &ValueSpace::Scalar).unwrap();
            assert!(out.lp_norm(2.0) <= m0 * f.lp_norm(2.0) * (1.0 + 1e-12));
        }
    }
}
