//! Truncated Hilbert-space arithmetic in the eigenbasis of `S`.

mod operators;
mod regularity;
mod spectrum;
mod vector;

pub use operators::{
    apply_s_pow, apply_s_x, apply_t_x, inner, phi_norm, t_x_in_place, PowerWeights,
};
pub use regularity::{regularity, tail_growth_ratio, RegularityReport, DIVERGENCE_RATIO};
pub use spectrum::{make_spectrum, Spectrum, SpectrumFamily};
pub use vector::{compensated_sum, HilbertVector};
