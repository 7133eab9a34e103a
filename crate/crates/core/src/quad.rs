//! Small quadrature and interpolation kit shared by the measure, symbol and
//! estimate code: Gauss–Legendre panels, log-substitution integrals with
//! power-law tail extrapolation, and deterministic pairwise summation.

use std::sync::OnceLock;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let m = order;
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m.div_ceil(2) {
            // Chebyshev initial guess, then Newton on P_m.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let d = m as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

pub fn gl8() -> &'static GaussLegendre {
    static G: OnceLock<GaussLegendre> = OnceLock::new();
    G.get_or_init(|| GaussLegendre::new(8))
}

pub fn gl12() -> &'static GaussLegendre {
    static G: OnceLock<GaussLegendre> = OnceLock::new();
    G.get_or_init(|| GaussLegendre::new(12))
}

/// ∫_lo^hi g(r) dr via r = e^u with composite Gauss–Legendre panels of
/// width `panel` in u. Requires 0 < lo < hi < ∞.
pub fn log_integral(lo: f64, hi: f64, panel: f64, g: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (ul, uh) = (lo.ln(), hi.ln());
    let k = ((uh - ul) / panel).ceil().max(1.0) as usize;
    let w = (uh - ul) / k as f64;
    let rule = gl8();
    let mut acc = Vec::with_capacity(k);
    for i in 0..k {
        let a = ul + w * i as f64;
        acc.push(rule.integrate(a, a + w, |u| {
            let r = u.exp();
            r * g(r)
        }));
    }
    pairwise_sum(&acc)
}

/// Local power-law exponent q of G at r, where |G(r)| ~ r^{q}; estimated from
/// a symmetric log-difference. NaN if G changes sign or vanishes there.
pub fn local_exponent(r: f64, g: &impl Fn(f64) -> f64) -> f64 {
    let h = 0.05f64;
    let (a, b) = (g(r * (-h).exp()), g(r * h.exp()));
    if !(a * b > 0.0) {
        return f64::NAN;
    }
    (b.abs().ln() - a.abs().ln()) / (2.0 * h)
}

/// ∫_lo^∞ g(r) dr for eventually power-law g of fixed sign: integrate to
/// `cut`, then add the tail G(cut)/q where G(r) = r·g(r) ~ r^{-q}.
/// Returns None when G does not decay.
pub fn tail_integral(lo: f64, cut: f64, g: impl Fn(f64) -> f64) -> Option<f64> {
    let body = log_integral(lo, cut, 0.5, &g);
    let big = |r: f64| r * g(r);
    let e = local_exponent(cut, &big);
    let gc = big(cut);
    if gc == 0.0 {
        return Some(body);
    }
    if !e.is_finite() || e >= -1e-3 {
        return None;
    }
    Some(body + gc / (-e))
}

/// ∫_0^hi g(r) dr for g with an integrable power singularity at 0.
pub fn head_integral(cut: f64, hi: f64, g: impl Fn(f64) -> f64) -> Option<f64> {
    let body = log_integral(cut, hi, 0.5, &g);
    let big = |r: f64| r * g(r);
    let e = local_exponent(cut, &big);
    let gc = big(cut);
    if gc == 0.0 {
        return Some(body);
    }
    if !e.is_finite() || e <= 1e-3 {
        return None;
    }
    Some(body + gc / e)
}

/// Deterministic pairwise (cascade) summation; the result depends only on the
/// order of `xs`, never on how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let m = n / 2;
            pairwise_sum(&xs[..m]) + pairwise_sum(&xs[m..])
        }
    }
}

/// Six-point Lagrange interpolation on a uniform grid `y[k]` at abscissae
/// x0 + k·h, clamped to the table.
pub fn lagrange6(y: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = y.len();
    debug_assert!(n >= 6);
    let t = (x - x0) / h;
    let base = (t.floor() as isize - 2).clamp(0, n as isize - 6) as usize;
    let mut s = 0.0;
    for i in 0..6 {
        let xi = (base + i) as f64;
        let mut w = 1.0;
        for j in 0..6 {
            if j != i {
                let xj = (base + j) as f64;
                w *= (t - xj) / (xi - xj);
            }
        }
        s += w * y[base + i];
    }
    s
}

/// `n` log-spaced points from lo to hi inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let g = GaussLegendre::new(8);
        let v = g.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let w: f64 = g.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tails_of_power_laws() {
        let t = tail_integral(1.0, 1e4, |r| r.powf(-1.5)).unwrap();
        assert!((t - 2.0).abs() < 1e-9, "{t}");
        assert!(tail_integral(1.0, 1e4, |r| 1.0 / r).is_none());
        let h = head_integral(1e-8, 1.0, |r| r.powf(-0.5)).unwrap();
        assert!((h - 2.0).abs() < 1e-9, "{h}");
    }

    #[test]
    fn lagrange_reproduces_quintics() {
        let y: Vec<f64> = (0..20).map(|k| (k as f64 * 0.1).powi(5)).collect();
        let v = lagrange6(&y, 0.0, 0.1, 0.73);
        assert!((v - 0.73f64.powi(5)).abs() < 1e-13);
    }
}
