//! Frequency-domain engine: grids, symbol tables, multipliers, transition
//! densities and the lemma checks built on them.
//!
//! Convention: 𝓕h(ξ) = ∫ e^{−i2πξ·x} h(x) dx, so T_t f = E f(· + Z_t) has
//! multiplier e^{ψt} and the density of Z_t has transform e^{t·conj ψ}.

mod checks;
mod density;
mod grid;
mod symbol;

pub use checks::{
    c_delta, mvt_space_check, mvt_time_check, scaling_identity_check, subordination_check, tail_bounds_check,
    ScalingReport, ScalingRow, ShiftRow, SubordinationReport, SweepGrid, TailReport, TailRow, TimeShiftRow,
};
pub use density::{
    adjoint_spectrum, comparability, density, density_adjoint, density_spectrum, semigroup, ALIASING_TOL,
};
pub use grid::{abs_pow, lp_norm, FrequencyGrid, GridFunction, Spectrum};
pub use symbol::{SymbolInterpolant, SymbolTable, REFINEMENT_TOL};
