use rand::Rng;

use super::lp::LPSystem;
use crate::error::{invalid, Error, Result};
use crate::scaling::ScalingTriple;
use crate::spectral::{lp_norm, FrequencyGrid, GridFunction, SymbolTable};

/// Value space of a field: scalars (V₀ = ℝ) or V_r = L_r(U, Π) realized as
/// finitely many mark channels with masses Π_i.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueSpace {
    Scalar,
    Marks { r: f64, masses: Vec<f64> },
}

impl ValueSpace {
    pub fn marks(r: f64, masses: Vec<f64>) -> Result<Self> {
        if !(r >= 1.0) || masses.is_empty() || masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return invalid("V_r needs r >= 1 and positive finite channel masses");
        }
        Ok(Self::Marks { r, masses })
    }

    pub fn channels(&self) -> usize {
        match self {
            Self::Scalar => 1,
            Self::Marks { masses, .. } => masses.len(),
        }
    }

    /// |h|_V for the channel values `h` at one point.
    pub fn norm(&self, h: &[f64]) -> f64 {
        match self {
            Self::Scalar => h[0].abs(),
            Self::Marks { r, masses } => {
                h.iter().zip(masses).map(|(v, m)| m * v.abs().powf(*r)).sum::<f64>().powf(1.0 / r)
            }
        }
    }
}

/// Field on a grid with values in a [`ValueSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    space: ValueSpace,
    channels: Vec<GridFunction>,
}

impl Field {
    pub fn new(space: ValueSpace, channels: Vec<GridFunction>) -> Result<Self> {
        if channels.len() != space.channels() {
            return invalid(format!("{} channels for a value space with {}", channels.len(), space.channels()));
        }
        for c in &channels[1..] {
            channels[0].grid().check_same(c.grid())?;
        }
        Ok(Self { space, channels })
    }

    pub fn scalar(f: GridFunction) -> Self {
        Self { space: ValueSpace::Scalar, channels: vec![f] }
    }

    pub fn space(&self) -> &ValueSpace {
        &self.space
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.channels[0].grid()
    }

    pub fn channels(&self) -> &[GridFunction] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<GridFunction> {
        self.channels
    }

    /// Apply the same real multiplier to every channel.
    pub fn map_multiplier(&self, m: &[f64]) -> Self {
        let channels = self.channels.iter().map(|c| c.fft().mul_real(m).ifft()).collect();
        Self { space: self.space.clone(), channels }
    }

    pub fn sub(&self, o: &Field) -> Result<Self> {
        if self.space != o.space {
            return Err(Error::GridMismatch("fields live in different value spaces".into()));
        }
        let channels = self.channels.iter().zip(&o.channels).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(Self { space: self.space.clone(), channels })
    }

    /// Pointwise |f(x)|_V.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        let n = self.grid().len();
        let mut h = vec![0.0; self.channels.len()];
        (0..n)
            .map(|i| {
                for (k, c) in self.channels.iter().enumerate() {
                    h[k] = c.values()[i];
                }
                self.space.norm(&h)
            })
            .collect()
    }

    /// (∫ |f(x)|_V^p dx)^{1/p}.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.pointwise_norm(), self.grid().cell(), p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceTag {
    /// Bessel-potential norm |J^s f|_{L_p}.
    H,
    /// Besov norm with J^s-weighted blocks.
    B,
    /// Besov norm with κ(N^{−j})^{−s}-weighted blocks.
    BTilde,
    /// Square-function norm |(Σ_j |κ(N^{−j})^{−s} φ_j ∗ f|²_V)^{1/2}|_{L_p}.
    HTilde,
}

impl SpaceTag {
    pub fn name(self) -> &'static str {
        match self {
            Self::H => "H",
            Self::B => "B",
            Self::BTilde => "B~",
            Self::HTilde => "H~",
        }
    }

    pub fn weight_mode(self) -> &'static str {
        match self {
            Self::H | Self::B => "bessel",
            Self::BTilde | Self::HTilde => "kappa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub space: SpaceTag,
    pub p: f64,
    /// q for Besov norms, 2 for the square-function norm, NaN for H.
    pub q: f64,
    pub s: f64,
    pub value: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("integrability index must lie in [1, inf), got {p}"));
    }
    Ok(())
}

/// |𝓕^{−1}[(1 − ψ^{μ_sym})^s f̂]|_{L_p(V)}.
pub fn h_norm(f: &Field, mu: &SymbolTable, s: f64, p: f64) -> Result<NormReport> {
    check_p(p)?;
    mu.grid().check_same(f.grid())?;
    let value = f.map_multiplier(&mu.bessel(s)).lp_norm(p);
    Ok(NormReport { space: SpaceTag::H, p, q: f64::NAN, s, value })
}

/// |f|_{L_p} + |𝓕^{−1}[(−ψ^{μ_sym})^s f̂]|_{L_p}, the equivalent form of the H norm.
pub fn h_norm_equivalent(f: &Field, mu: &SymbolTable, s: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    mu.grid().check_same(f.grid())?;
    let m: Vec<f64> = mu.sym_values().iter().map(|v| (-v).max(0.0).powf(s)).collect();
    Ok(f.lp_norm(p) + f.map_multiplier(&m).lp_norm(p))
}

/// Weights for the Besov blocks.
#[derive(Clone, Copy)]
pub enum BesovWeight<'a> {
    /// Blocks J^s φ_j ∗ f.
    Bessel(&'a SymbolTable),
    /// Blocks κ(N^{−j})^{−s} φ_j ∗ f.
    Kappa(&'a ScalingTriple),
}

/// (Σ_j |w_j φ_j ∗ f|^q_{L_p(V)})^{1/q}.
pub fn besov_norm(f: &Field, sys: &LPSystem, weight: BesovWeight<'_>, s: f64, p: f64, q: f64) -> Result<NormReport> {
    check_p(p)?;
    check_p(q)?;
    sys.grid().check_same(f.grid())?;
    let nf = sys.base() as f64;
    let mut terms = Vec::with_capacity(sys.len());
    let bessel = match weight {
        BesovWeight::Bessel(mu) => {
            mu.grid().check_same(f.grid())?;
            Some(mu.bessel(s))
        }
        BesovWeight::Kappa(_) => None,
    };
    for j in 0..sys.len() {
        let v = match (&bessel, weight) {
            (Some(b), _) => {
                let m: Vec<f64> = sys.window(j).iter().zip(b).map(|(w, b)| w * b).collect();
                f.map_multiplier(&m).lp_norm(p)
            }
            (None, BesovWeight::Kappa(k)) => k.kappa(nf.powi(-(j as i32))).powf(-s) * f.map_multiplier(sys.window(j)).lp_norm(p),
            _ => unreachable!(),
        };
        terms.push(v.powf(q));
    }
    let space = if bessel.is_some() { SpaceTag::B } else { SpaceTag::BTilde };
    Ok(NormReport { space, p, q, s, value: crate::quad::pairwise_sum(&terms).powf(1.0 / q) })
}

/// |(Σ_j |κ(N^{−j})^{−s} φ_j ∗ f|²_V)^{1/2}|_{L_p}.
pub fn h_tilde_norm(f: &Field, sys: &LPSystem, kappa: &ScalingTriple, s: f64, p: f64) -> Result<NormReport> {
    check_p(p)?;
    sys.grid().check_same(f.grid())?;
    let nf = sys.base() as f64;
    let mut sq = vec![0.0; f.grid().len()];
    for j in 0..sys.len() {
        let w = kappa.kappa(nf.powi(-(j as i32))).powf(-s);
        for (acc, v) in sq.iter_mut().zip(f.map_multiplier(sys.window(j)).pointwise_norm()) {
            *acc += (w * v).powi(2);
        }
    }
    let root: Vec<f64> = sq.iter().map(|v| v.sqrt()).collect();
    Ok(NormReport { space: SpaceTag::HTilde, p, q: 2.0, s, value: lp_norm(&root, f.grid().cell(), p) })
}

/// Φ_n = Σ_{j≤n} Φ ∗ φ_j χ_{U_n}: low-pass to level n and keep the first
/// `marks` channels (the rest are zeroed).
pub fn approximate(f: &Field, sys: &LPSystem, n: usize, marks: usize) -> Result<Field> {
    if n < 1 {
        return invalid("approximation level must be >= 1");
    }
    sys.grid().check_same(f.grid())?;
    let lp = sys.low_pass(n);
    let channels = f
        .channels()
        .iter()
        .enumerate()
        .map(|(k, c)| if k < marks { c.fft().mul_real(&lp).ifft() } else { GridFunction::zeros(c.grid()) })
        .collect();
    Field::new(f.space().clone(), channels)
}

/// Random smooth function with Fourier support in |ξ| ≤ `xi_max`: a sum of
/// `modes` randomly phased plane waves under a Gaussian envelope of width `width`.
pub fn random_band_limited(grid: &FrequencyGrid, xi_max: f64, modes: usize, width: f64, rng: &mut impl Rng) -> GridFunction {
    let waves: Vec<([f64; 2], f64, f64)> = (0..modes)
        .map(|_| {
            let r = xi_max * rng.gen::<f64>();
            let th = std::f64::consts::TAU * rng.gen::<f64>();
            let dir = if grid.dim() == 1 { [r * th.cos().signum(), 0.0] } else { [r * th.cos(), r * th.sin()] };
            (dir, std::f64::consts::TAU * rng.gen::<f64>(), rng.gen::<f64>() - 0.5)
        })
        .collect();
    let raw = GridFunction::from_fn(grid, |x| {
        let env = (-(x[0] * x[0] + x[1] * x[1]) / (width * width)).exp();
        env * waves
            .iter()
            .map(|(k, ph, a)| a * (std::f64::consts::TAU * (k[0] * x[0] + k[1] * x[1]) + ph).cos())
            .sum::<f64>()
    });
    // Enforce the band limit exactly.
    let cut: Vec<f64> = (0..grid.len()).map(|i| if grid.norm_xi(i) <= xi_max { 1.0 } else { 0.0 }).collect();
    raw.fft().mul_real(&cut).ifft()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingReport {
    pub s: f64,
    pub eps: f64,
    pub p: f64,
    /// max |f|_{H^s} / |f|_{B^{s+ε}_{pp}}.
    pub h_over_b: f64,
    /// max |f|_{B^s_{pp}} / |f|_{H^s} (NaN for p < 2).
    pub b_over_h: f64,
}

/// Empirical embedding constants B^{s+ε}_{pp} ⊂ H^s_p and, for p ≥ 2, H^s_p ⊂ B^s_{pp}.
pub fn embedding_check(
    fs: &[GridFunction],
    mu: &SymbolTable,
    sys: &LPSystem,
    s: f64,
    eps: f64,
    p: f64,
) -> Result<EmbeddingReport> {
    if !(p > 1.0) || !(eps > 0.0) {
        return invalid("embedding check needs p > 1 and eps > 0");
    }
    let (mut hb, mut bh) = (0.0f64, if p >= 2.0 { 0.0f64 } else { f64::NAN });
    for f in fs {
        let f = Field::scalar(f.clone());
        let h = h_norm(&f, mu, s, p)?.value;
        if h == 0.0 {
            return invalid("embedding check needs nonzero functions");
        }
        let b_eps = besov_norm(&f, sys, BesovWeight::Bessel(mu), s + eps, p, p)?.value;
        hb = hb.max(h / b_eps);
        if p >= 2.0 {
            let b = besov_norm(&f, sys, BesovWeight::Bessel(mu), s, p, p)?.value;
            bh = bh.max(b / h);
        }
    }
    Ok(EmbeddingReport { s, eps, p, h_over_b: hb, b_over_h: bh })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellWeightReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Ratios κ(N^{−j})^{−s} / (1 − ψ^{μ_sym}(ξ))^s over nodes inside each shell
/// N^{j−1} < |ξ| < N^{j+1}, j ≥ 1.
pub fn shell_weight_equivalence(mu: &SymbolTable, sys: &LPSystem, kappa: &ScalingTriple, s: f64) -> ShellWeightReport {
    let g = mu.grid();
    let nf = sys.base() as f64;
    let bessel = mu.bessel(s);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in 1..sys.len() {
        let w = kappa.kappa(nf.powi(-(j as i32))).powf(-s);
        for i in 0..g.len() {
            if sys.window(j)[i] > 0.0 {
                let r = w / bessel[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    ShellWeightReport { min_ratio: lo, max_ratio: hi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_measure::LevyMeasure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (FrequencyGrid, SymbolTable, LPSystem) {
        let g = FrequencyGrid::new(1, 512, 16.0).unwrap();
        let mu = SymbolTable::eval(&LevyMeasure::stable(1, 1.0).unwrap(), &g).unwrap();
        let sys = LPSystem::new(2, &g).unwrap();
        (g, mu, sys)
    }

    #[test]
    fn h_zero_is_lp() {
        let (g, mu, _) = setup();
        let f = Field::scalar(GridFunction::from_fn(&g, |x| (-x[0] * x[0]).exp()));
        let h = h_norm(&f, &mu, 0.0, 3.0).unwrap().value;
        assert!((h / f.lp_norm(3.0) - 1.0).abs() < 1e-12);
        assert_eq!(h_norm(&Field::scalar(GridFunction::zeros(&g)), &mu, 1.0, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn bessel_shift_is_isometric() {
        let (g, mu, _) = setup();
        let f = GridFunction::from_fn(&g, |x| (-x[0] * x[0]).exp());
        let jt = Field::scalar(f.fft().mul_real(&mu.bessel(0.4)).ifft());
        let a = h_norm(&jt, &mu, 0.3, 2.0).unwrap().value;
        let b = h_norm(&Field::scalar(f), &mu, 0.7, 2.0).unwrap().value;
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn approximation_is_idempotent_on_band_limited() {
        let (g, _, sys) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_band_limited(&g, 1.5, 6, 3.0, &mut rng);
        let field = Field::new(
            ValueSpace::marks(2.0, vec![0.5, 1.5]).unwrap(),
            vec![f.clone(), f.scaled(-2.0)],
        )
        .unwrap();
        // Low-pass at level 1 is 1 on |ξ| ≤ N.
        let a = approximate(&field, &sys, 1, 2).unwrap();
        assert!(a.sub(&field).unwrap().lp_norm(2.0) < 1e-12);
        let cut = approximate(&field, &sys, 1, 1).unwrap();
        assert_eq!(cut.channels()[1].sup_norm(), 0.0);
    }

    #[test]
    fn shell_weights_are_equivalent_for_stable() {
        let (_, mu, sys) = setup();
        let k = ScalingTriple::power(1.0).unwrap();
        let r = shell_weight_equivalence(&mu, &sys, &k, 1.0);
        assert!(r.max_ratio / r.min_ratio < 100.0, "{r:?}");
    }
}
