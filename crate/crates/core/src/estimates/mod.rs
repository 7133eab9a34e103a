//! Empirical verification of the a priori estimates: Monte Carlo sweeps of the
//! solution estimates, the exact p = 2 Plancherel bound, the kernel estimate
//! for the stochastic convolution and the Hörmander condition.
//!
//! Verdicts are comparative: a bounded empirical constant across a sweep,
//! never a claim about the (non-explicit) constants themselves.

mod hormander;
mod plancherel;
mod t1;

pub use hormander::{
    epsilon_sensitivity, hormander_integral, hormander_integral_c0, hormander_sweep, EpsilonSensitivity,
    HormanderPoint, HormanderReport, HormanderSetup, PLATEAU_TOL, TAIL_LIMIT,
};
pub use plancherel::{plancherel_p2, PlancherelReport};
pub use t1::{
    scaling_invariance, t1_cases, t1_ensemble, verify_smooth_estimate, verify_t1, RhoSlope, SmoothCase, SmoothEstimateReport,
    T1Case, T1Config, T1Report,
};

use std::fmt;

/// Relative Monte Carlo error above which a row is underpowered.
pub const POWER_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Violated,
    Underpowered,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Violated => "violated",
            Verdict::Underpowered => "underpowered",
        })
    }
}

/// One (inequality, case, p, λ) row.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub inequality: &'static str,
    pub case: String,
    pub p: f64,
    pub s: f64,
    pub lambda: f64,
    pub lhs: f64,
    /// One standard error of `lhs`.
    pub lhs_err: f64,
    pub rhs: f64,
    /// lhs / rhs (0 when both vanish).
    pub constant: f64,
    pub n_paths: usize,
    pub verdict: Verdict,
}

impl EstimateReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        inequality: &'static str,
        case: &str,
        p: f64,
        s: f64,
        lambda: f64,
        (lhs, lhs_err): (f64, f64),
        rhs: f64,
        n_paths: usize,
        c_cap: f64,
    ) -> Self {
        let constant = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let verdict = if lhs > 0.0 && lhs_err > POWER_LIMIT * lhs {
            Verdict::Underpowered
        } else if lhs - 3.0 * lhs_err > c_cap * rhs {
            Verdict::Violated
        } else {
            Verdict::Bounded
        };
        Self { inequality, case: case.to_string(), p, s, lambda, lhs, lhs_err, rhs, constant, n_paths, verdict }
    }
}

/// ρ_λ = min(T, 1/λ).
pub fn rho(lambda: f64, horizon: f64) -> f64 {
    if lambda > 0.0 { horizon.min(1.0 / lambda) } else { horizon }
}
