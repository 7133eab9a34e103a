use rayon::prelude::*;

use super::{GridData, SpaceTimeGrid};
use crate::error::{invalid, Result};
use crate::quad::logspace;
use crate::scaling::ScalingTriple;

/// Radii in the discretized sup over δ.
pub const DEFAULT_RADII: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Cylinders centred at the point.
    Centered,
    /// All ladder cylinders containing the point.
    Noncentered,
}

/// Log-spaced radii from half a cell to the domain size, deduplicated by
/// their index half-widths (a, b) on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusLadder {
    pub deltas: Vec<f64>,
    pub widths: Vec<(usize, usize)>,
}

impl RadiusLadder {
    pub fn new(grid: &SpaceTimeGrid, kappa: &ScalingTriple, count: usize) -> Result<Self> {
        if count < 2 {
            return invalid("radius ladder needs at least two radii");
        }
        let (x_lo, x_hi) = grid.x_range();
        let lo = 0.5 * grid.dx().min(kappa.a(grid.dt()));
        let hi = 1.01 * (x_hi - x_lo).max(kappa.a(grid.horizon()));
        let mut deltas = Vec::new();
        let mut widths: Vec<(usize, usize)> = Vec::new();
        for d in logspace(lo, hi, count) {
            let w = grid.half_widths(d, kappa);
            if widths.last() != Some(&w) {
                deltas.push(d);
                widths.push(w);
            }
        }
        Ok(Self { deltas, widths })
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }
}

fn clip(c: usize, w: usize, n: usize) -> (usize, usize) {
    (c.saturating_sub(w), (c + w).min(n - 1))
}

/// Cells of the clipped cylinder with half-widths `w` around (i, j).
fn cells(f: &GridData, i: usize, j: usize, w: (usize, usize)) -> Vec<f64> {
    let g = f.grid();
    let (i0, i1) = clip(i, w.0, g.nt());
    let (j0, j1) = clip(j, w.1, g.nx());
    let mut out = Vec::with_capacity((i1 - i0 + 1) * (j1 - j0 + 1));
    for r in i0..=i1 {
        out.extend_from_slice(&f.values()[g.index(r, j0)..=g.index(r, j1)]);
    }
    out
}

/// (1/|Q|)∫_Q |f − f_Q| over the clipped cylinder.
pub fn mean_oscillation(f: &GridData, i: usize, j: usize, w: (usize, usize)) -> f64 {
    let v = cells(f, i, j, w);
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - m).abs()).sum::<f64>() / n
}

/// (1/|Q|²)∫_Q∫_Q |f(a) − f(b)| via the sorted-values identity.
pub fn double_average(f: &GridData, i: usize, j: usize, w: (usize, usize)) -> f64 {
    let mut v = cells(f, i, j, w);
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len();
    let s: f64 = v.iter().enumerate().map(|(k, x)| (2.0 * k as f64 + 1.0 - m as f64) * x).sum();
    2.0 * s / (m * m) as f64
}

#[derive(Clone, Copy)]
enum Stat {
    AbsAverage,
    Oscillation,
    Double,
}

fn stat_table(f: &GridData, w: (usize, usize), stat: Stat) -> Vec<f64> {
    let g = f.grid();
    match stat {
        Stat::AbsAverage => {
            // Summed-area table of |f|.
            let (nt, nx) = (g.nt(), g.nx());
            let mut s = vec![0.0; (nt + 1) * (nx + 1)];
            for i in 0..nt {
                let mut row = 0.0;
                for j in 0..nx {
                    row += f.at(i, j).abs();
                    s[(i + 1) * (nx + 1) + j + 1] = s[i * (nx + 1) + j + 1] + row;
                }
            }
            let mut out = Vec::with_capacity(g.len());
            for i in 0..nt {
                let (i0, i1) = clip(i, w.0, nt);
                for j in 0..nx {
                    let (j0, j1) = clip(j, w.1, nx);
                    let sum = s[(i1 + 1) * (nx + 1) + j1 + 1] - s[i0 * (nx + 1) + j1 + 1] - s[(i1 + 1) * (nx + 1) + j0]
                        + s[i0 * (nx + 1) + j0];
                    out.push(sum / ((i1 - i0 + 1) * (j1 - j0 + 1)) as f64);
                }
            }
            out
        }
        Stat::Oscillation | Stat::Double => (0..g.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / g.nx(), k % g.nx());
                match stat {
                    Stat::Oscillation => mean_oscillation(f, i, j, w),
                    _ => double_average(f, i, j, w),
                }
            })
            .collect(),
    }
}

/// max over centres within half-widths `w` of each node (separable).
fn window_max(g: &SpaceTimeGrid, v: &[f64], w: (usize, usize)) -> Vec<f64> {
    let (nt, nx) = (g.nt(), g.nx());
    let mut rows = vec![0.0; v.len()];
    for i in 0..nt {
        for j in 0..nx {
            let (j0, j1) = clip(j, w.1, nx);
            rows[i * nx + j] = v[i * nx + j0..=i * nx + j1].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        }
    }
    let mut out = vec![0.0; v.len()];
    for i in 0..nt {
        let (i0, i1) = clip(i, w.0, nt);
        for j in 0..nx {
            out[i * nx + j] = (i0..=i1).map(|r| rows[r * nx + j]).fold(f64::NEG_INFINITY, f64::max);
        }
    }
    out
}

fn sup_over_ladder(f: &GridData, ladder: &RadiusLadder, mode: Mode, stat: Stat) -> GridData {
    let g = f.grid();
    let mut best = vec![f64::NEG_INFINITY; g.len()];
    for &w in &ladder.widths {
        let t = stat_table(f, w, stat);
        let t = match mode {
            Mode::Centered => t,
            Mode::Noncentered => window_max(g, &t, w),
        };
        for (b, v) in best.iter_mut().zip(t) {
            *b = b.max(v);
        }
    }
    GridData { grid: g.clone(), values: best }
}

/// ℳf (centred) or 𝓜̃f (noncentred): sup over the ladder of A_δ|f|.
pub fn maximal(f: &GridData, ladder: &RadiusLadder, mode: Mode) -> GridData {
    sup_over_ladder(f, ladder, mode, Stat::AbsAverage)
}

/// f^♯: sup over ladder cylinders of the mean oscillation.
pub fn sharp(f: &GridData, ladder: &RadiusLadder, mode: Mode) -> GridData {
    sup_over_ladder(f, ladder, mode, Stat::Oscillation)
}

/// f^♮: sup over ladder cylinders of the double average of |f(a) − f(b)|.
pub fn sharp_natural(f: &GridData, ladder: &RadiusLadder, mode: Mode) -> GridData {
    sup_over_ladder(f, ladder, mode, Stat::Double)
}

/// Constant C with 𝓜̃f ≤ C·ℳf for every f on this grid and ladder: a
/// ladder cylinder containing p sits inside the centred one with doubled
/// half-widths, so C is the worst clipped-measure ratio between the two.
pub fn sandwich_constant(grid: &SpaceTimeGrid, ladder: &RadiusLadder) -> f64 {
    let span = |w: usize, n: usize| (2 * w + 1).min(n) as f64;
    let corner = |w: usize, n: usize| (w.min(n - 1) + 1) as f64;
    let mut c: f64 = 1.0;
    for &(a, b) in &ladder.widths {
        let big = ladder
            .widths
            .iter()
            .find(|&&(ar, br)| (ar >= 2 * a || ar >= grid.nt() - 1) && (br >= 2 * b || br >= grid.nx() - 1))
            .copied()
            .unwrap_or(*ladder.widths.last().expect("nonempty ladder"));
        let ratio = span(big.0, grid.nt()) * span(big.1, grid.nx()) / (corner(a, grid.nt()) * corner(b, grid.nx()));
        c = c.max(ratio);
    }
    c
}

/// max over `alphas` of α·|{ℳf > α}| / ∫|f|.
pub fn weak_type_constant(f: &GridData, ladder: &RadiusLadder, mode: Mode, alphas: &[f64]) -> f64 {
    let m = maximal(f, ladder, mode);
    let mass = f.abs().integral();
    alphas.iter().map(|&a| a * m.level_measure(a) / mass).fold(0.0, f64::max)
}

/// |f|_{L_p} / |f^♯|_{L_p} with the noncentred sharp function.
pub fn fefferman_stein_ratio(f: &GridData, ladder: &RadiusLadder, p: f64) -> f64 {
    f.lp_norm(p) / sharp(f, ladder, Mode::Noncentered).lp_norm(p)
}

#[cfg(test)]
mod tests {
    use super::super::random_field;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (SpaceTimeGrid, ScalingTriple, RadiusLadder) {
        let g = SpaceTimeGrid::new(n, n, 1.0, -1.0, 1.0).unwrap();
        let k = ScalingTriple::power(1.0).unwrap();
        let l = RadiusLadder::new(&g, &k, DEFAULT_RADII).unwrap();
        (g, k, l)
    }

    #[test]
    fn constants_are_fixed_points() {
        let (g, _, l) = setup(16);
        let f = GridData::from_fn(&g, |_, _| 3.0);
        for mode in [Mode::Centered, Mode::Noncentered] {
            assert!(maximal(&f, &l, mode).values().iter().all(|v| (v - 3.0).abs() < 1e-12));
            assert!(sharp(&f, &l, mode).values().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn ladder_reaches_single_cells_and_the_domain() {
        let (g, _, l) = setup(32);
        assert_eq!(l.widths[0], (0, 0));
        let last = *l.widths.last().unwrap();
        assert!(last.0 >= g.nt() - 1 && last.1 >= g.nx() - 1);
    }

    #[test]
    fn sandwich_and_sharp_relations() {
        let (g, _, l) = setup(24);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_field(&g, 6, true, &mut rng);
        let c = sandwich_constant(&g, &l);
        let m = maximal(&f, &l, Mode::Centered);
        let mt = maximal(&f, &l, Mode::Noncentered);
        for (a, b) in m.values().iter().zip(mt.values()) {
            assert!(a <= b && *b <= c * a * (1.0 + 1e-12));
        }
        let s = sharp(&f, &l, Mode::Noncentered);
        let nat = sharp_natural(&f, &l, Mode::Noncentered);
        let abs_nat = sharp_natural(&f.abs(), &l, Mode::Noncentered);
        for k in 0..g.len() {
            let (s, n) = (s.values()[k], nat.values()[k]);
            assert!(s <= n * (1.0 + 1e-12) + 1e-15 && n <= 2.0 * s * (1.0 + 1e-12) + 1e-15);
            assert!(s <= 2.0 * mt.values()[k] + 1e-15);
            assert!(abs_nat.values()[k] <= 2.0 * n + 1e-15);
        }
    }

    #[test]
    fn double_average_matches_brute_force() {
        let (g, _, _) = setup(8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_field(&g, 3, true, &mut rng);
        let v = cells(&f, 3, 4, (2, 1));
        let brute: f64 = v.iter().flat_map(|a| v.iter().map(move |b| (a - b).abs())).sum::<f64>() / (v.len() * v.len()) as f64;
        assert!((double_average(&f, 3, 4, (2, 1)) - brute).abs() < 1e-14);
    }

    #[test]
    fn indicator_of_a_cylinder_peaks_at_one() {
        let (g, k, l) = setup(33);
        let w = g.half_widths(l.deltas[4], &k);
        let f = GridData::from_fn(&g, |t, x| {
            let (i, j) = ((t / g.dt()) as usize, ((x + 1.0) / g.dx()) as usize);
            if i.abs_diff(16) <= w.0 && j.abs_diff(16) <= w.1 { 1.0 } else { 0.0 }
        });
        assert!((maximal(&f, &l, Mode::Centered).at(16, 16) - 1.0).abs() < 1e-12);
    }
}
