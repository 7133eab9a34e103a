use crate::error::{Error, Result};
use crate::spectral::{FrequencyGrid, GridFunction};

/// C^∞ step: 1 on (−∞, 0], 0 on [1, ∞), built from the e^{−1/x} mollifier.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let e = |y: f64| (-1.0 / y).exp();
    let (a, b) = (e(1.0 - x), e(x));
    a / (a + b)
}

/// N-adic Littlewood–Paley system on a grid.
///
/// With θ(r) = 1 for r ≤ 1, 0 for r ≥ N (smooth in between), the bump is
/// φ(ξ) = θ(|ξ|) − θ(N|ξ|), window j ≥ 1 is φ(N^{−j}ξ) and φ₀ = θ(|ξ|), so the
/// windows telescope to one. The enlarged bump is φ̃(ξ) = θ(|ξ|/N) − θ(N²|ξ|).
#[derive(Debug, Clone)]
pub struct LPSystem {
    base: u32,
    grid: FrequencyGrid,
    windows: Vec<Vec<f64>>,
    tilde: Vec<Vec<f64>>,
}

/// Minimum number of shells (j ≥ 1) that must start below the Nyquist frequency.
pub const MIN_SHELLS: usize = 3;

impl LPSystem {
    pub fn new(base: u32, grid: &FrequencyGrid) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!("LP base must be >= 2, got {base}")));
        }
        let nf = base as f64;
        let nyq = grid.nyquist();
        // Shells j ≥ 1 whose lower edge N^{j−1} lies under the Nyquist frequency.
        let shells = (1..64).take_while(|&j| nf.powi(j - 1) < nyq).count();
        if shells < MIN_SHELLS {
            return Err(Error::BaseTooLarge { base, shells });
        }
        let max_xi = (0..grid.len()).map(|i| grid.norm_xi(i)).fold(0.0, f64::max);
        // Smallest J with N^{−J} max|ξ| ≤ 1: windows 0..=J cover every node.
        let mut top = 0;
        while nf.powi(top) < max_xi {
            top += 1;
        }
        let theta = |r: f64| smooth_step((r - 1.0) / (nf - 1.0));
        let norms: Vec<f64> = (0..grid.len()).map(|i| grid.norm_xi(i)).collect();
        let mut windows = Vec::with_capacity(top as usize + 1);
        let mut tilde = Vec::with_capacity(top as usize + 1);
        windows.push(norms.iter().map(|&r| theta(r)).collect());
        tilde.push(norms.iter().map(|&r| theta(r / nf)).collect());
        for j in 1..=top {
            let s = nf.powi(-j);
            windows.push(norms.iter().map(|&r| theta(s * r) - theta(nf * s * r)).collect());
            tilde.push(norms.iter().map(|&r| theta(s * r / nf) - theta(nf * nf * s * r)).collect());
        }
        Ok(Self { base, grid: grid.clone(), windows, tilde })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Number of windows (indices 0..len).
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn window(&self, j: usize) -> &[f64] {
        &self.windows[j]
    }

    /// φ̃(N^{−j}·) (for j = 0: φ̃₀ = φ₀ + φ₁).
    pub fn tilde_window(&self, j: usize) -> &[f64] {
        &self.tilde[j]
    }

    /// Low-pass multiplier Σ_{j≤n} φ_j = θ(N^{−n}|ξ|).
    pub fn low_pass(&self, n: usize) -> Vec<f64> {
        let nf = self.base as f64;
        let s = nf.powi(-(n as i32));
        (0..self.grid.len()).map(|i| smooth_step((s * self.grid.norm_xi(i) - 1.0) / (nf - 1.0))).collect()
    }

    /// max over nodes of |Σ_j φ_j − 1|.
    pub fn partition_residual(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| (self.windows.iter().map(|w| w[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// max over nodes and j of |φ̃_j φ_j − φ_j|.
    pub fn tilde_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, w) in self.windows.iter().enumerate() {
            let t = if j == 0 {
                // φ̃₀ = φ₀ + φ₁.
                w.iter().zip(self.windows.get(1).map_or(&vec![0.0; w.len()], |v| v)).map(|(a, b)| a + b).collect::<Vec<_>>()
            } else {
                self.tilde[j].clone()
            };
            for (a, b) in t.iter().zip(w) {
                worst = worst.max((a * b - b).abs());
            }
        }
        worst
    }

    /// φ_j ∗ f for every j.
    pub fn blocks(&self, f: &GridFunction) -> Result<Vec<GridFunction>> {
        self.grid.check_same(f.grid())?;
        let fhat = f.fft();
        Ok(self.windows.iter().map(|w| fhat.mul_real(w).ifft()).collect())
    }

    /// Max deviation of Σ_j φ_j ∗ f from f.
    pub fn reconstruction_error(&self, f: &GridFunction) -> Result<f64> {
        let blocks = self.blocks(f)?;
        let mut sum = GridFunction::zeros(&self.grid);
        for b in &blocks {
            sum = sum.add(b)?;
        }
        Ok(sum.sub(f)?.sup_norm())
    }
}

/// Smallest integer N ≥ 2 with l(1/N) < 1 (None if none up to 1024).
pub fn default_base(l: impl Fn(f64) -> f64) -> Option<u32> {
    (2..=1024).find(|&n| l(1.0 / n as f64) < 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        let g = FrequencyGrid::new(1, 1024, 16.0).unwrap();
        let s = LPSystem::new(2, &g).unwrap();
        assert!(s.partition_residual() < 1e-12);
        assert!(s.tilde_residual() < 1e-15);
        assert_eq!(s.window(0)[0], 1.0);
        assert!(s.windows[1..].iter().all(|w| w[0] == 0.0));
    }

    #[test]
    fn window_support() {
        let g = FrequencyGrid::new(1, 512, 8.0).unwrap();
        let s = LPSystem::new(3, &g).unwrap();
        for j in 1..s.len() {
            for i in 0..g.len() {
                let r = g.norm_xi(i);
                let lo = 3f64.powi(j as i32 - 1);
                if r < lo || r > 3.0 * 3f64.powi(j as i32) {
                    assert_eq!(s.window(j)[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn base_too_large() {
        let g = FrequencyGrid::new(1, 16, 8.0).unwrap();
        assert!(matches!(LPSystem::new(4, &g), Err(Error::BaseTooLarge { .. })));
    }
}
