use std::sync::Arc;

use num_complex::Complex64;

use super::JumpPath;
use crate::error::{invalid, Error, Result};
use crate::function_spaces::{Field, ValueSpace};
use crate::spectral::{FrequencyGrid, GridFunction, Spectrum, SymbolTable};

type ChannelFn = Arc<dyn Fn(f64) -> Vec<GridFunction> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Zero,
    Constant(Arc<Vec<Vec<Complex64>>>),
    Fn(ChannelFn),
}

/// Time-indexed field with one or more channels, evaluated in Fourier space.
#[derive(Clone)]
pub struct TimeField {
    grid: FrequencyGrid,
    channels: usize,
    kind: Kind,
}

impl std::fmt::Debug for TimeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            Kind::Zero => "zero",
            Kind::Constant(_) => "constant",
            Kind::Fn(_) => "time-dependent",
        };
        write!(f, "TimeField({kind}, {} channels)", self.channels)
    }
}

impl TimeField {
    pub fn zero(grid: &FrequencyGrid, channels: usize) -> Self {
        Self { grid: grid.clone(), channels, kind: Kind::Zero }
    }

    pub fn constant(field: &Field) -> Self {
        let spectra = field.channels().iter().map(|c| c.fft().values().to_vec()).collect();
        Self { grid: field.grid().clone(), channels: field.channels().len(), kind: Kind::Constant(Arc::new(spectra)) }
    }

    pub fn scalar_constant(g: &GridFunction) -> Self {
        Self::constant(&Field::scalar(g.clone()))
    }

    /// `f(t)` must return `channels` functions on `grid`.
    pub fn from_fn(
        grid: &FrequencyGrid,
        channels: usize,
        f: impl Fn(f64) -> Vec<GridFunction> + Send + Sync + 'static,
    ) -> Self {
        Self { grid: grid.clone(), channels, kind: Kind::Fn(Arc::new(f)) }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self.kind, Kind::Fn(_))
    }

    /// a·self + b·other.
    pub fn combine(&self, a: f64, other: &TimeField, b: f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        if self.channels != other.channels {
            return Err(Error::GridMismatch("time fields with different channel counts".into()));
        }
        if self.is_constant() && other.is_constant() {
            let (x, y) = (self.spectra_at(0.0), other.spectra_at(0.0));
            let spectra = x
                .iter()
                .zip(&y)
                .map(|(u, v)| u.iter().zip(v).map(|(p, q)| a * p + b * q).collect())
                .collect();
            return Ok(Self { grid: self.grid.clone(), channels: self.channels, kind: Kind::Constant(Arc::new(spectra)) });
        }
        let (s, o) = (self.clone(), other.clone());
        Ok(Self::from_fn(&self.grid, self.channels, move |t| {
            let (x, y) = (s.channel_values(t), o.channel_values(t));
            x.iter().zip(&y).map(|(u, v)| u.scaled(a).add(&v.scaled(b)).expect("same grid")).collect()
        }))
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.combine(c, &self.clone(), 0.0).expect("same field")
    }

    /// Channel spectra at time t.
    pub fn spectra_at(&self, t: f64) -> Vec<Vec<Complex64>> {
        match &self.kind {
            Kind::Zero => vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]; self.channels],
            Kind::Constant(s) => s.as_ref().clone(),
            Kind::Fn(f) => f(t).iter().map(|c| c.fft().values().to_vec()).collect(),
        }
    }

    /// Channel values at time t.
    pub fn channel_values(&self, t: f64) -> Vec<GridFunction> {
        match &self.kind {
            Kind::Zero => vec![GridFunction::zeros(&self.grid); self.channels],
            Kind::Constant(s) => s.iter().map(|v| Spectrum::new(self.grid.clone(), v.clone()).expect("len").ifft()).collect(),
            Kind::Fn(f) => f(t),
        }
    }

    pub fn field_at(&self, t: f64, space: &ValueSpace) -> Result<Field> {
        Field::new(space.clone(), self.channel_values(t))
    }

    /// Σ_i w_i F̂_i(t).
    fn weighted(&self, w: &[f64], t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        if self.is_zero() {
            return out;
        }
        let spectra = match &self.kind {
            Kind::Constant(s) => std::borrow::Cow::Borrowed(s.as_ref()),
            _ => std::borrow::Cow::Owned(self.spectra_at(t)),
        };
        for (c, wi) in spectra.iter().zip(w) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += wi * v;
            }
        }
        out
    }

    fn channel_spectrum(&self, k: usize, t: f64) -> Vec<Complex64> {
        match &self.kind {
            Kind::Zero => vec![Complex64::new(0.0, 0.0); self.grid.len()],
            Kind::Constant(s) => s[k].clone(),
            Kind::Fn(f) => f(t)[k].fft().values().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// k-th node of the uniform grid t = kT/steps.
    Uniform(usize),
    /// Left limit at the k-th event.
    PreJump(usize),
    /// Value right after the k-th event.
    PostJump(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    pub kind: NodeKind,
}

/// Uniform time grid with every event time inserted twice (left limit, value).
#[derive(Debug, Clone, PartialEq)]
pub struct EventGrid {
    horizon: f64,
    steps: usize,
    nodes: Vec<Node>,
}

impl EventGrid {
    pub fn new(horizon: f64, steps: usize, path: Option<&JumpPath>) -> Result<Self> {
        if !(horizon > 0.0) || steps == 0 {
            return invalid("event grid needs a positive horizon and at least one step");
        }
        let h = horizon / steps as f64;
        let mut nodes: Vec<Node> = (0..=steps)
            .map(|k| Node { t: if k == steps { horizon } else { k as f64 * h }, kind: NodeKind::Uniform(k) })
            .collect();
        if let Some(p) = path {
            if p.events.iter().any(|e| e.t > horizon) {
                return invalid("path extends beyond the grid horizon");
            }
            for (k, e) in p.events.iter().enumerate() {
                nodes.push(Node { t: e.t, kind: NodeKind::PreJump(k) });
                nodes.push(Node { t: e.t, kind: NodeKind::PostJump(k) });
            }
            // Stable sort keeps uniform nodes before coincident events and
            // Pre before Post.
            nodes.sort_by(|a, b| a.t.total_cmp(&b.t));
        }
        Ok(Self { horizon, steps, nodes })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

/// Spectral states recorded at selected nodes of an [`EventGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    grid: FrequencyGrid,
    nodes: Vec<Node>,
    spectra: Vec<Vec<Complex64>>,
}

impl Series {
    pub fn new(grid: &FrequencyGrid, nodes: Vec<Node>, spectra: Vec<Vec<Complex64>>) -> Self {
        Self { grid: grid.clone(), nodes, spectra }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spectrum(&self, i: usize) -> Spectrum {
        Spectrum::new(self.grid.clone(), self.spectra[i].clone()).expect("len")
    }

    pub fn spectral_values(&self, i: usize) -> &[Complex64] {
        &self.spectra[i]
    }

    pub fn value(&self, i: usize) -> GridFunction {
        self.spectrum(i).ifft()
    }

    pub fn last_value(&self) -> GridFunction {
        self.value(self.len() - 1)
    }

    /// Pointwise sum of two series recorded on the same nodes.
    pub fn add(&self, o: &Series) -> Result<Self> {
        self.grid.check_same(&o.grid)?;
        if self.nodes != o.nodes {
            return Err(Error::GridMismatch("series recorded on different time nodes".into()));
        }
        let spectra = self
            .spectra
            .iter()
            .zip(&o.spectra)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self { grid: self.grid.clone(), nodes: self.nodes.clone(), spectra })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let spectra = self.spectra.iter().map(|s| s.iter().map(|v| v * c).collect()).collect();
        Self { grid: self.grid.clone(), nodes: self.nodes.clone(), spectra }
    }
}

/// How P_{t−s} acts: not at all, or through the semigroup of a symbol table.
#[derive(Debug, Clone, Copy)]
pub enum Smoothing<'a> {
    Identity,
    Semigroup(&'a SymbolTable),
}

impl Smoothing<'_> {
    /// Per-mode generator A = ψ − λ (or −λ).
    pub fn generator(&self, grid: &FrequencyGrid, lambda: f64) -> Result<Vec<Complex64>> {
        match self {
            Smoothing::Identity => Ok(vec![Complex64::new(-lambda, 0.0); grid.len()]),
            Smoothing::Semigroup(t) => {
                t.grid().check_same(grid)?;
                Ok(t.values().iter().map(|p| p - lambda).collect())
            }
        }
    }
}

/// Deterministic source Σ_i w_i F_i(t) for [`evolve`].
pub struct Source<'a> {
    pub field: &'a TimeField,
    pub weights: Vec<f64>,
}

/// Integrate Ŝ' = AŜ + Σ_i w_i F̂_i(t) over the event grid with the
/// exponential trapezoid rule Ŝ(t+h) = e^{Ah}Ŝ(t) + (h/2)[e^{Ah}F̂(t) + F̂(t+h)],
/// adding Φ̂(t_k, z_k) at each event. States at nodes with `keep` true are stored.
pub fn evolve(
    ev: &EventGrid,
    a: &[Complex64],
    init: Option<&[Complex64]>,
    source: Option<&Source<'_>>,
    jumps: Option<(&JumpPath, &TimeField)>,
    keep: &dyn Fn(&Node) -> bool,
) -> Result<Series> {
    let n = a.len();
    let grid = match (source, jumps) {
        (Some(s), _) => s.field.grid().clone(),
        (None, Some((_, f))) => f.grid().clone(),
        (None, None) => return invalid("evolve needs a source or a jump field to fix the grid"),
    };
    if grid.len() != n {
        return Err(Error::GridMismatch("generator and field sizes differ".into()));
    }
    let mut state: Vec<Complex64> = match init {
        Some(s) => s.to_vec(),
        None => vec![Complex64::new(0.0, 0.0); n],
    };
    let active_source = source.filter(|s| !s.field.is_zero());
    let mut f_prev = active_source.map(|s| s.field.weighted(&s.weights, 0.0));
    let uniform_h = ev.dt();
    let uniform_e: Vec<Complex64> = a.iter().map(|z| (z * uniform_h).exp()).collect();
    let mut nodes = Vec::new();
    let mut spectra = Vec::new();
    let mut prev_t = 0.0;
    for (i, node) in ev.nodes().iter().enumerate() {
        let h = node.t - prev_t;
        if i > 0 && h > 0.0 {
            let irregular;
            let e: &[Complex64] = if (h - uniform_h).abs() <= 1e-14 * uniform_h {
                &uniform_e
            } else {
                irregular = a.iter().map(|z| (z * h).exp()).collect::<Vec<_>>();
                &irregular
            };
            match (active_source, f_prev.as_mut()) {
                (Some(src), Some(fp)) => {
                    let f_new = src.field.weighted(&src.weights, node.t);
                    for k in 0..n {
                        state[k] = e[k] * (state[k] + 0.5 * h * fp[k]) + 0.5 * h * f_new[k];
                    }
                    *fp = f_new;
                }
                _ => {
                    for k in 0..n {
                        state[k] *= e[k];
                    }
                }
            }
            prev_t = node.t;
        }
        if let (NodeKind::PostJump(k), Some((path, phi))) = (node.kind, jumps) {
            let ev_k = path.events[k];
            let jump = phi.channel_spectrum(ev_k.mark, ev_k.t);
            for (s, j) in state.iter_mut().zip(&jump) {
                *s += j;
            }
        }
        if keep(node) {
            nodes.push(*node);
            spectra.push(state.clone());
        }
    }
    Ok(Series::new(&grid, nodes, spectra))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump_noise::{sample_path, MarkSpace};

    #[test]
    fn event_grid_brackets_jumps() {
        let s = MarkSpace::new(vec![3.0]).unwrap();
        let p = sample_path(&s, 1.0, 5).unwrap();
        let ev = EventGrid::new(1.0, 8, Some(&p)).unwrap();
        assert_eq!(ev.nodes().len(), 9 + 2 * p.events.len());
        assert!(ev.nodes().windows(2).all(|w| w[0].t <= w[1].t));
        for (k, e) in p.events.iter().enumerate() {
            let i = ev.nodes().iter().position(|n| n.kind == NodeKind::PreJump(k)).unwrap();
            assert_eq!(ev.nodes()[i + 1].kind, NodeKind::PostJump(k));
            assert_eq!(ev.nodes()[i].t, e.t);
        }
    }

    #[test]
    fn constant_source_with_damping() {
        // S' = −λS + 1 ⇒ S(t) = (1 − e^{−λt})/λ (trapezoid error O(h²)).
        let g = FrequencyGrid::new(1, 8, 1.0).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let f = TimeField::scalar_constant(&one);
        let ev = EventGrid::new(1.0, 512, None).unwrap();
        let a = Smoothing::Identity.generator(&g, 3.0).unwrap();
        let s = evolve(&ev, &a, None, Some(&Source { field: &f, weights: vec![1.0] }), None, &|_| true).unwrap();
        let v = s.last_value().values()[3];
        let want = (1.0 - (-3.0f64).exp()) / 3.0;
        assert!((v - want).abs() < 1e-5, "{v} {want}");
    }
}
