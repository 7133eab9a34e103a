use super::maximal::{maximal, sharp, Mode, RadiusLadder};
use super::{GridData, SpaceTimeGrid};
use crate::error::{invalid, Error, Result};
use crate::quad::pairwise_sum;
use crate::scaling::ScalingTriple;

/// Expansion factors c₁ < c₁* < c₁** of the Whitney cover, as multiples of
/// the distance D(p) = inf{δ : Q_δ(p) ∩ F ≠ ∅}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitneyFactors {
    pub c1: f64,
    pub c1_star: f64,
    pub c1_star2: f64,
}

impl Default for WhitneyFactors {
    fn default() -> Self {
        Self { c1: 0.25, c1_star: 0.5, c1_star2: 1.0 }
    }
}

/// One piece b_k = (f − f_{C^k})χ_{C^k} of the bad part.
#[derive(Debug, Clone, PartialEq)]
pub struct CzPart {
    /// Grid node (i, j) of the centre.
    pub centre: (usize, usize),
    pub distance: f64,
    /// Cells of C^k (flat indices).
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
    pub average: f64,
    /// Clipped measure of Q^{*k}.
    pub star_measure: f64,
    /// Whether C^k ⊆ Q^{*k} on the grid.
    pub inside_star: bool,
}

impl CzPart {
    pub fn integral(&self, cell: f64) -> f64 {
        pairwise_sum(&self.values) * cell
    }
}

#[derive(Debug, Clone)]
pub struct CzDecomposition {
    pub alpha: f64,
    pub g: GridData,
    pub parts: Vec<CzPart>,
    /// Σ_k |Q^{*k}|.
    pub star_measure: f64,
    /// α Σ|Q^{*k}| / ∫|f|.
    pub cover_constant: f64,
    /// sup|g| / α.
    pub g_constant: f64,
    /// Cells of O_α that fell outside every Q^{*k} of the greedy cover.
    pub outside_star: usize,
}

impl CzDecomposition {
    /// The degenerate decomposition g = f, b = 0 (empty level set).
    pub fn trivial(f: &GridData, alpha: f64) -> Self {
        let sup = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            alpha,
            g: f.clone(),
            parts: Vec::new(),
            star_measure: 0.0,
            cover_constant: 0.0,
            g_constant: sup / alpha,
            outside_star: 0,
        }
    }

    /// g + Σ_k b_k.
    pub fn reconstruct(&self) -> GridData {
        let mut out = self.g.clone();
        for p in &self.parts {
            for (&c, v) in p.cells.iter().zip(&p.values) {
                out.values[c] += v;
            }
        }
        out
    }
}

fn rect(grid: &SpaceTimeGrid, i: usize, j: usize, w: (usize, usize)) -> impl Iterator<Item = usize> + '_ {
    let (i0, i1) = (i.saturating_sub(w.0), (i + w.0).min(grid.nt() - 1));
    let (j0, j1) = (j.saturating_sub(w.1), (j + w.1).min(grid.nx() - 1));
    (i0..=i1).flat_map(move |r| (j0..=j1).map(move |c| grid.index(r, c)))
}

fn in_rect(grid: &SpaceTimeGrid, centre: (usize, usize), w: (usize, usize), k: usize) -> bool {
    let (i, j) = (k / grid.nx(), k % grid.nx());
    i.abs_diff(centre.0) <= w.0 && j.abs_diff(centre.1) <= w.1
}

/// f = g + Σ_k b_k at level α over a greedy Whitney cover of
/// O_α = {𝓜̃f > α}: disjoint Q^k = Q_{c₁D}(p_k) ∩ O_α chosen largest-D first,
/// C^k ⊇ Q^k partitioning O_α (cells go to the first Q_{c₁*D}(p_k) holding
/// them), Q^{*k} = Q_{c₁**D}(p_k).
pub fn cz_decompose(
    f: &GridData,
    alpha: f64,
    ladder: &RadiusLadder,
    kappa: &ScalingTriple,
    factors: WhitneyFactors,
) -> Result<CzDecomposition> {
    if !(alpha > 0.0) {
        return invalid("alpha must be positive");
    }
    if f.values().iter().any(|v| *v < 0.0) {
        return invalid("decomposition needs f >= 0");
    }
    let WhitneyFactors { c1, c1_star, c1_star2 } = factors;
    if !(0.0 < c1 && c1 < c1_star && c1_star < c1_star2) {
        return invalid("Whitney factors must satisfy 0 < c1 < c1* < c1**");
    }
    let grid = f.grid().clone();
    let (nt, nx) = (grid.nt(), grid.nx());
    let mt = maximal(f, ladder, Mode::Noncentered);
    let in_o: Vec<bool> = mt.values().iter().map(|&v| v > alpha).collect();
    if !in_o.iter().any(|&b| b) {
        return Err(Error::EmptyLevelSet { alpha });
    }
    if in_o.iter().all(|&b| b) {
        return invalid(format!("level set of alpha = {alpha} covers the whole domain"));
    }
    // Summed-area table of F = O^c.
    let mut sat = vec![0u32; (nt + 1) * (nx + 1)];
    for i in 0..nt {
        let mut row = 0;
        for j in 0..nx {
            row += u32::from(!in_o[grid.index(i, j)]);
            sat[(i + 1) * (nx + 1) + j + 1] = sat[i * (nx + 1) + j + 1] + row;
        }
    }
    let touches_f = |i: usize, j: usize, w: (usize, usize)| {
        let (i0, i1) = (i.saturating_sub(w.0), (i + w.0).min(nt - 1));
        let (j0, j1) = (j.saturating_sub(w.1), (j + w.1).min(nx - 1));
        sat[(i1 + 1) * (nx + 1) + j1 + 1] + sat[i0 * (nx + 1) + j0]
            > sat[i0 * (nx + 1) + j1 + 1] + sat[(i1 + 1) * (nx + 1) + j0]
    };
    let mut points: Vec<(usize, f64)> = Vec::new();
    for k in 0..grid.len() {
        if in_o[k] {
            let (i, j) = (k / nx, k % nx);
            let r = ladder.widths.iter().position(|&w| touches_f(i, j, w)).expect("the largest cylinder meets F");
            points.push((k, ladder.deltas[r]));
        }
    }
    points.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    // Greedy disjoint family.
    let mut owner: Vec<Option<usize>> = vec![None; grid.len()];
    let mut chosen: Vec<(usize, f64)> = Vec::new();
    for &(k, d) in &points {
        let (i, j) = (k / nx, k % nx);
        let w = grid.half_widths(c1 * d, kappa);
        if rect(&grid, i, j, w).all(|c| !in_o[c] || owner[c].is_none()) {
            let id = chosen.len();
            for c in rect(&grid, i, j, w) {
                if in_o[c] {
                    owner[c] = Some(id);
                }
            }
            chosen.push((k, d));
        }
    }
    let centre = |id: usize| (chosen[id].0 / nx, chosen[id].0 % nx);
    let star_w: Vec<(usize, usize)> = chosen.iter().map(|&(_, d)| grid.half_widths(c1_star * d, kappa)).collect();
    let star2_w: Vec<(usize, usize)> = chosen.iter().map(|&(_, d)| grid.half_widths(c1_star2 * d, kappa)).collect();
    let mut outside = 0;
    for k in 0..grid.len() {
        if !in_o[k] || owner[k].is_some() {
            continue;
        }
        let pick = (0..chosen.len())
            .find(|&id| in_rect(&grid, centre(id), star_w[id], k))
            .or_else(|| (0..chosen.len()).find(|&id| in_rect(&grid, centre(id), star2_w[id], k)))
            .unwrap_or_else(|| {
                outside += 1;
                let (i, j) = (k / nx, k % nx);
                let dist = |id: usize| {
                    let (ci, cj) = centre(id);
                    let (a, b) = star2_w[id];
                    (i.abs_diff(ci) as f64 / (a + 1) as f64).max(j.abs_diff(cj) as f64 / (b + 1) as f64)
                };
                (0..chosen.len()).min_by(|&x, &y| dist(x).total_cmp(&dist(y))).expect("nonempty family")
            });
        owner[k] = Some(pick);
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); chosen.len()];
    for (k, o) in owner.iter().enumerate() {
        if let Some(id) = o {
            members[*id].push(k);
        }
    }
    let cell = grid.cell();
    let mut g = f.clone();
    let mut parts = Vec::with_capacity(chosen.len());
    for (id, cells) in members.into_iter().enumerate() {
        let vals: Vec<f64> = cells.iter().map(|&c| f.values()[c]).collect();
        let average = pairwise_sum(&vals) / vals.len() as f64;
        for &c in &cells {
            g.values[c] = average;
        }
        let (ci, cj) = centre(id);
        let w = star2_w[id];
        let star_measure = rect(&grid, ci, cj, w).count() as f64 * cell;
        let inside_star = cells.iter().all(|&c| in_rect(&grid, (ci, cj), w, c));
        parts.push(CzPart {
            centre: (ci, cj),
            distance: chosen[id].1,
            values: cells.iter().map(|&c| f.values()[c] - average).collect(),
            cells,
            average,
            star_measure,
            inside_star,
        });
    }
    let star_measure = pairwise_sum(&parts.iter().map(|p| p.star_measure).collect::<Vec<_>>());
    let g_sup = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(CzDecomposition {
        alpha,
        cover_constant: alpha * star_measure / f.integral(),
        g_constant: g_sup / alpha,
        star_measure,
        parts,
        g,
        outside_star: outside,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodLambdaReport {
    pub alpha: f64,
    pub lambda: f64,
    /// |{f > α}|.
    pub lhs: f64,
    /// (4/α)∫χ_{𝓜̃f > λα} f^♯.
    pub rhs: f64,
}

/// |{f > α}| against (4/α)∫χ_{𝓜̃f > λα} f^♯ with λ = 1/(2c), for f ≥ 0.
pub fn good_lambda_check(f: &GridData, alpha: f64, c: f64, ladder: &RadiusLadder) -> Result<GoodLambdaReport> {
    if f.values().iter().any(|v| *v < 0.0) || !(alpha > 0.0) || !(c > 0.0) {
        return invalid("good-lambda check needs f >= 0, alpha > 0, c > 0");
    }
    let lambda = 1.0 / (2.0 * c);
    let mt = maximal(f, ladder, Mode::Noncentered);
    let sh = sharp(f, ladder, Mode::Noncentered);
    let masked: Vec<f64> =
        mt.values().iter().zip(sh.values()).map(|(&m, &s)| if m > lambda * alpha { s } else { 0.0 }).collect();
    let rhs = 4.0 / alpha * pairwise_sum(&masked) * f.grid().cell();
    Ok(GoodLambdaReport { alpha, lambda, lhs: f.level_measure(alpha), rhs })
}

#[cfg(test)]
mod tests {
    use super::super::{random_field, DEFAULT_RADII};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (GridData, RadiusLadder, ScalingTriple) {
        let g = SpaceTimeGrid::new(32, 32, 1.0, 0.0, 1.0).unwrap();
        let k = ScalingTriple::power(1.0).unwrap();
        let l = RadiusLadder::new(&g, &k, DEFAULT_RADII).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        (random_field(&g, 5, false, &mut rng), l, k)
    }

    #[test]
    fn parts_reconstruct_and_have_zero_mean() {
        let (f, l, k) = setup();
        let alpha = 2.0 * f.mean();
        let cz = cz_decompose(&f, alpha, &l, &k, WhitneyFactors::default()).unwrap();
        assert!(!cz.parts.is_empty());
        let r = cz.reconstruct();
        let scale = f.values().iter().fold(0.0f64, |m, v| m.max(*v));
        for (a, b) in r.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * scale);
        }
        let cell = f.grid().cell();
        for p in &cz.parts {
            assert!(p.integral(cell).abs() < 1e-13 * scale, "{}", p.integral(cell));
        }
        assert!(cz.cover_constant.is_finite() && cz.g_constant.is_finite());
    }

    #[test]
    fn level_above_the_maximal_function_is_empty() {
        let (f, l, k) = setup();
        let sup = maximal(&f, &l, Mode::Noncentered).values().iter().cloned().fold(0.0, f64::max);
        let e = cz_decompose(&f, 1.01 * sup, &l, &k, WhitneyFactors::default()).unwrap_err();
        assert!(matches!(e, Error::EmptyLevelSet { .. }));
        let t = CzDecomposition::trivial(&f, 1.01 * sup);
        assert_eq!(t.reconstruct(), f);
    }

    #[test]
    fn good_lambda_holds_on_a_sample() {
        let (f, l, _) = setup();
        let r = good_lambda_check(&f, 1.5 * f.mean(), 4.0, &l).unwrap();
        assert!(r.lhs <= r.rhs, "{r:?}");
    }
}
