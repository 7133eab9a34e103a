//! N-adic Littlewood–Paley blocks and the H / Besov norms built on them,
//! for scalar and mark-channel (V_r) valued fields.

mod lp;
mod norms;

pub use lp::{default_base, smooth_step, LPSystem, MIN_SHELLS};
pub use norms::{
    approximate, besov_norm, embedding_check, h_norm, h_norm_equivalent, h_tilde_norm, random_band_limited,
    shell_weight_equivalence, BesovWeight, EmbeddingReport, Field, NormReport, ShellWeightReport, SpaceTag, ValueSpace,
};
