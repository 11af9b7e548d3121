//! Simulation and verification toolkit for the random rank-1 iteration
//!
//! ```text
//! θ(n+1) = θ(n) − γ⟨θ(n), x(n)⟩ x(n)
//! ```
//!
//! on a finite truncation of a Hilbert space. Everything is expressed in the
//! orthonormal eigenbasis of the covariance operator `S = E[x ⊗ x]`, so `S`
//! and all of its powers are diagonal.
//!
//! * [`hilbert`]: spectra, vectors, `φ_β` norms, powers of `S`, the rank-1
//!   maps `S_x` / `T_x` and regularity exponents.
//! * [`sampler`]: feature-vector distributions and their moment diagnostics.
//! * [`dynamics`]: stochastic trajectories, Monte Carlo ensembles and the
//!   deterministic mean dynamics `T^n`.
//! * [`analysis`]: rate fitting and numerical verifiers for the analytic
//!   bounds.
//! * [`cli`]: the configuration-driven experiment runner behind the
//!   `rankone` binary.

pub mod analysis;
pub mod cli;
pub mod dynamics;
mod error;
pub mod hilbert;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use hilbert::{HilbertVector, Spectrum, SpectrumFamily};
pub use sampler::{SamplerKind, SamplerSpec};

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
