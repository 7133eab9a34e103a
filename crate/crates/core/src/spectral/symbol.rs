//! Symbol tables ψ^π(ξ_k) on frequency grids and the multipliers built from
//! them.

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::levy_measure::radial::{profile_symbol, ProfileTable};
use crate::levy_measure::{AngularNode, Compensator, LevyMeasure, RadialProfile};

/// Relative tolerance between the two quadrature refinement levels.
pub const REFINEMENT_TOL: f64 = 1e-6;
/// Grids with more nodes than this use the interpolant in d = 1.
const DIRECT_LIMIT_1D: usize = 4096;

/// ψ through per-profile tables (fast, for large or many grids).
#[derive(Clone)]
pub struct SymbolInterpolant {
    nodes: Vec<AngularNode>,
    profiles: Vec<RadialProfile>,
    tables: Vec<ProfileTable>,
    comp: Compensator,
    imag: bool,
}

impl std::fmt::Debug for SymbolInterpolant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymbolInterpolant({} nodes, {} profiles)", self.nodes.len(), self.profiles.len())
    }
}

impl SymbolInterpolant {
    pub fn new(pi: &LevyMeasure) -> Self {
        let comp = pi.compensator();
        let imag = !pi.is_symmetric();
        let tables = pi.profiles().par_iter().map(|p| ProfileTable::build(p, comp, imag)).collect();
        Self { nodes: pi.nodes().to_vec(), profiles: pi.profiles().to_vec(), tables, comp, imag }
    }

    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in &self.nodes {
            let a = xi[0] * n.direction[0] + xi[1] * n.direction[1];
            if a == 0.0 {
                continue;
            }
            let v = self.tables[n.profile].lookup(a.abs()).unwrap_or_else(|| {
                profile_symbol(&self.profiles[n.profile], a.abs(), self.comp, self.imag, false)
            });
            acc += n.weight * if a < 0.0 { v.conj() } else { v };
        }
        acc
    }
}

#[derive(Debug, Clone)]
pub struct SymbolTable {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
    sym: Vec<f64>,
}

/// Up to eight nonzero sample nodes spread geometrically along the first axis.
fn sample_nodes(grid: &FrequencyGrid) -> Vec<usize> {
    let half = grid.n() / 2;
    let mut out: Vec<usize> = (0..8)
        .map(|k| {
            let j = (half as f64).powf(k as f64 / 7.0).round() as usize;
            grid.index(j.clamp(1, half - 1), 0)
        })
        .collect();
    out.dedup();
    out
}

impl SymbolTable {
    /// Evaluate ψ^π on every node (direct quadrature in d = 1 for moderate
    /// grids, the interpolant otherwise) after a refinement check on sample
    /// nodes.
    pub fn eval(pi: &LevyMeasure, grid: &FrequencyGrid) -> Result<Self> {
        if pi.dim() != grid.dim() {
            return Err(Error::GridMismatch(format!("measure in d={} on grid in d={}", pi.dim(), grid.dim())));
        }
        let direct = grid.dim() == 1 && grid.len() <= DIRECT_LIMIT_1D;
        if direct {
            refinement_check(pi, grid, |xi| pi.symbol(xi))?;
            Ok(Self::build(grid, |xi| pi.symbol(xi)))
        } else {
            let it = SymbolInterpolant::new(pi);
            refinement_check(pi, grid, |xi| it.eval(xi))?;
            Ok(Self::build(grid, |xi| it.eval(xi)))
        }
    }

    /// Evaluate through a prebuilt interpolant (no refinement check).
    pub fn from_interpolant(it: &SymbolInterpolant, grid: &FrequencyGrid) -> Self {
        Self::build(grid, |xi| it.eval(xi))
    }

    /// Tabulate a closed-form symbol.
    pub fn from_fn(grid: &FrequencyGrid, f: impl Fn([f64; 2]) -> Complex64 + Sync) -> Self {
        Self::build(grid, f)
    }

    /// Fill canonical nodes and mirror by ψ(−ξ) = conj ψ(ξ); ψ(0) = 0.
    fn build(grid: &FrequencyGrid, f: impl Fn([f64; 2]) -> Complex64 + Sync) -> Self {
        let n = grid.len();
        let computed: Vec<(usize, Complex64)> = (0..n)
            .into_par_iter()
            .filter(|&i| i <= grid.partner(i))
            .map(|i| (i, if i == 0 { Complex64::new(0.0, 0.0) } else { f(grid.xi(i)) }))
            .collect();
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for (i, v) in computed {
            values[i] = v;
            let j = grid.partner(i);
            if j != i {
                values[j] = v.conj();
            }
        }
        let sym = values.iter().map(|v| v.re).collect();
        Self { grid: grid.clone(), values, sym }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// ψ^{π_sym} = Re ψ.
    pub fn sym_values(&self) -> &[f64] {
        &self.sym
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Linear combination a·ψ₁ + b·ψ₂ (symbol of a signed combination of measures).
    pub fn combine(&self, a: f64, other: &SymbolTable, b: f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let sym = values.iter().map(|v| v.re).collect();
        Ok(Self { grid: self.grid.clone(), values, sym })
    }

    /// (1 − ψ^{μ_sym})^s.
    pub fn bessel(&self, s: f64) -> Vec<f64> {
        self.sym.iter().map(|&v| (1.0 - v).powf(s)).collect()
    }

    /// −(−ψ^{μ_sym})^δ; δ = 1 returns ψ^{μ_sym} itself.
    pub fn fractional(&self, delta: f64) -> Vec<f64> {
        if delta == 1.0 {
            return self.sym.clone();
        }
        self.sym.iter().map(|&v| -(-v).max(0.0).powf(delta)).collect()
    }

    /// ψ(0) = 0, Hermitian symmetry on paired nodes, Re ψ ≤ 0.
    pub fn check_invariants(&self) -> Result<()> {
        if self.values[0] != Complex64::new(0.0, 0.0) {
            return Err(Error::MeasureInvalid("psi(0) != 0".into()));
        }
        for (i, v) in self.values.iter().enumerate() {
            if v.re > 0.0 {
                return Err(Error::MeasureInvalid(format!("Re psi > 0 at {:?}", self.grid.xi(i))));
            }
            let j = self.grid.partner(i);
            if j != i && self.values[j] != v.conj() {
                return Err(Error::MeasureInvalid(format!("Hermitian symmetry broken at {:?}", self.grid.xi(i))));
            }
        }
        Ok(())
    }
}

fn refinement_check(pi: &LevyMeasure, grid: &FrequencyGrid, coarse: impl Fn([f64; 2]) -> Complex64) -> Result<()> {
    for i in sample_nodes(grid) {
        let xi = grid.xi(i);
        let (c, f) = (coarse(xi), pi.symbol_fine(xi));
        let rel = (c - f).norm() / f.norm().max(f64::MIN_POSITIVE);
        if !(rel <= REFINEMENT_TOL) {
            return Err(Error::QuadratureNotConverged { xi, rel_change: rel });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_symbol_table() {
        let pi = LevyMeasure::stable(1, 1.0).unwrap();
        let g = FrequencyGrid::new(1, 128, 8.0).unwrap();
        let t = SymbolTable::eval(&pi, &g).unwrap();
        t.check_invariants().unwrap();
        for i in 1..g.len() {
            let want = -2.0 * std::f64::consts::PI.powi(2) * g.xi(i)[0].abs();
            assert!((t.values()[i].re / want - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn planar_interpolant_is_isotropic_for_stable() {
        let pi = LevyMeasure::stable(2, 1.0).unwrap();
        let g = FrequencyGrid::new(2, 16, 4.0).unwrap();
        let t = SymbolTable::eval(&pi, &g).unwrap();
        t.check_invariants().unwrap();
        let a = t.values()[g.index(3, 0)].re;
        let b = t.values()[g.index(0, 3)].re;
        assert!((a / b - 1.0).abs() < 1e-3, "{a} {b}");
    }

    #[test]
    fn multiplier_algebra() {
        let pi = LevyMeasure::stable(1, 1.5).unwrap();
        let g = FrequencyGrid::new(1, 64, 4.0).unwrap();
        let t = SymbolTable::eval(&pi, &g).unwrap();
        let (a, b, c) = (t.bessel(0.3), t.bessel(0.4), t.bessel(0.7));
        for i in 0..g.len() {
            assert!((a[i] * b[i] / c[i] - 1.0).abs() < 1e-14);
        }
        assert_eq!(t.fractional(1.0), t.sym_values().to_vec());
        assert!(t.bessel(0.0).iter().all(|&v| v == 1.0));
    }
}
