//! Spectral and Monte Carlo toolkit for nonlocal parabolic equations
//! du = (L^π u − λu + f) dt + ∫ Φ q(dt, dz) driven by compensated Poisson noise.
//!
//! Layers, bottom up: [`levy_measure`] and [`scaling`] (measures, Bernstein
//! kernels, κ and its inverses, the D/B assumption checks), [`spectral`]
//! (symbols, densities, semigroups on periodic FFT grids), [`function_spaces`]
//! (Littlewood-Paley systems and the H / Besov norms), [`jump_noise`] (paths,
//! stochastic integrals), [`solver`] (mild solutions), [`estimates`] (empirical
//! constants of the a priori estimates, Hörmander condition), [`cz`]
//! (space-time maximal functions, Calderón-Zygmund decomposition, operator 𝒢)
//! and [`cli`] (the batch driver).
// Validation is written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cz;
pub mod error;
pub mod estimates;
pub mod function_spaces;
pub mod jump_noise;
pub mod levy_measure;
pub mod quad;
pub mod scaling;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
