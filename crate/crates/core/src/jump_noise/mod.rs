//! Poisson point measures on [0,T] × U with finitely many mark channels, the
//! compensated measure q = p − Π dt, and the stochastic convolution
//! ∫₀^t e^{−λ(t−s)} P_{t−s} Φ(s, ·, z) q(ds, dz) evaluated spectrally.

mod integral;
mod series;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, WeightedIndex};

use crate::error::{invalid, Result};
use crate::function_spaces::ValueSpace;

pub use integral::{
    compensation_check, ito_isometry_check, moment_estimate_check, stochastic_integral, CompensationReport,
    IsometryReport, MomentReport, MomentSetup,
};
pub(crate) use integral::{coefficient_norm_p, mean_se};
pub use series::{evolve, EventGrid, Node, NodeKind, Series, Smoothing, Source, TimeField};

/// Finite mark space: channel i carries mass Π_i > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkSpace {
    masses: Vec<f64>,
}

impl MarkSpace {
    /// An empty list gives the zero measure (paths without events).
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return invalid("mark masses must be positive and finite");
        }
        Ok(Self { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// U_n: the first n channels.
    pub fn prefix(&self, n: usize) -> Self {
        Self { masses: self.masses[..n.min(self.masses.len())].to_vec() }
    }

    /// V_r over these channels.
    pub fn value_space(&self, r: f64) -> Result<ValueSpace> {
        ValueSpace::marks(r, self.masses.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub mark: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    pub horizon: f64,
    pub seed: u64,
    pub stream: u64,
    pub events: Vec<JumpEvent>,
}

impl JumpPath {
    /// Number of events on channel `mark`.
    pub fn count(&self, mark: usize) -> usize {
        self.events.iter().filter(|e| e.mark == mark).count()
    }
}

/// Per-path generator: ChaCha8 keyed by the master seed, stream = path index.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Path on stream 0 of `seed`.
pub fn sample_path(space: &MarkSpace, horizon: f64, seed: u64) -> Result<JumpPath> {
    sample_path_indexed(space, horizon, seed, 0)
}

/// Exponential inter-arrivals at rate ΣΠ_i, marks drawn ∝ Π_i.
pub fn sample_path_indexed(space: &MarkSpace, horizon: f64, seed: u64, stream: u64) -> Result<JumpPath> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    let mut events = Vec::new();
    let rate = space.total_mass();
    if rate > 0.0 {
        let mut rng = path_rng(seed, stream);
        let gap = Exp::new(rate).expect("positive rate");
        let marks = WeightedIndex::new(&space.masses).expect("positive weights");
        let mut t = 0.0;
        loop {
            t += gap.sample(&mut rng);
            if t > horizon {
                break;
            }
            events.push(JumpEvent { t, mark: marks.sample(&mut rng) });
        }
    }
    Ok(JumpPath { horizon, seed, stream, events })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mass_gives_empty_path() {
        let p = sample_path(&MarkSpace::new(vec![]).unwrap(), 5.0, 1).unwrap();
        assert!(p.events.is_empty());
    }

    #[test]
    fn paths_are_reproducible_and_sorted() {
        let s = MarkSpace::new(vec![1.0, 2.0]).unwrap();
        let a = sample_path_indexed(&s, 2.0, 9, 4).unwrap();
        assert_eq!(a, sample_path_indexed(&s, 2.0, 9, 4).unwrap());
        assert_ne!(a.events, sample_path_indexed(&s, 2.0, 9, 5).unwrap().events);
        assert!(a.events.windows(2).all(|w| w[0].t < w[1].t));
        assert!(a.events.iter().all(|e| e.t > 0.0 && e.t <= 2.0 && e.mark < 2));
    }

    #[test]
    fn poisson_mean_count() {
        let s = MarkSpace::new(vec![1.0, 2.0]).unwrap();
        let n = 100_000;
        let total: usize = (0..n).map(|i| sample_path_indexed(&s, 2.0, 11, i).unwrap().events.len()).sum();
        let mean = total as f64 / n as f64;
        // Var = 6, so the standard error is sqrt(6/n).
        assert!((mean - 6.0).abs() < 3.0 * (6.0 / n as f64).sqrt(), "{mean}");
    }
}
