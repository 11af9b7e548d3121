//! Feature-vector distributions over a spectrum.
//!
//! All three kinds have independent-in-the-eigenbasis (or single-atom)
//! coordinates with `E[x_i²] = λ_i` and `E[x_i x_j] = 0`, so `E[S_x] = S`.

mod gamma;
mod moments;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hilbert::{compensated_sum, HilbertVector, Spectrum};
use crate::rng::{self, Stream};

pub use gamma::gamma_small_shape;
pub use moments::{
    assumption3_constant, assumption3_lhs, default_probes, moment_report, resolvable_probes, Assumption3Estimate,
    MomentReport, ProbeRatio, MIN_PROBE_HITS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// Independent Gaussians with variances `λ_i`.
    Gff,
    /// `x_i = s_i √y_i`, fair sign `s_i`, `y_i ~ Gamma(λ_i, 1)`.
    GammaSym,
    /// `x = √M e_I` with `P(I = i) = λ_i / M`, `M = Σ λ_j`.
    CoordinateBounded,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Gff => "gff",
            SamplerKind::GammaSym => "gamma-sym",
            SamplerKind::CoordinateBounded => "coordinate-bounded",
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "gff" => Ok(SamplerKind::Gff),
            "gamma-sym" => Ok(SamplerKind::GammaSym),
            "coordinate-bounded" => Ok(SamplerKind::CoordinateBounded),
            other => Err(crate::Error::invalid(format!(
                "unknown sampler kind '{other}' (expected gff, gamma-sym or coordinate-bounded)"
            ))),
        }
    }
}

/// A sampler bound to a spectrum and a seed.
#[derive(Debug, Clone)]
pub struct SamplerSpec {
    kind: SamplerKind,
    spectrum: Spectrum,
    seed: u64,
    sqrt_lambda: Vec<f64>,
    cdf: Vec<f64>,
    trace: f64,
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, spectrum: Spectrum, seed: u64) -> Self {
        let sqrt_lambda = spectrum.eigenvalues().iter().map(|l| l.sqrt()).collect();
        let trace = spectrum.trace();
        let cdf = match kind {
            SamplerKind::CoordinateBounded => {
                let mut running = 0.0;
                let mut partial: Vec<f64> = spectrum
                    .eigenvalues()
                    .iter()
                    .map(|l| {
                        running += l;
                        running / trace
                    })
                    .collect();
                *partial.last_mut().unwrap() = 1.0;
                partial
            }
            _ => Vec::new(),
        };
        SamplerSpec {
            kind,
            spectrum,
            seed,
            sqrt_lambda,
            cdf,
            trace,
        }
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// The random stream with the given index under this sampler's seed.
    pub fn stream(&self, index: u64) -> Stream {
        rng::stream(self.seed, index)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> HilbertVector {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        HilbertVector::from_raw(out)
    }

    /// Writes one draw into `out`, overwriting every coefficient.
    pub fn sample_into(&self, rng: &mut impl Rng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        match self.kind {
            SamplerKind::Gff => {
                for (o, s) in out.iter_mut().zip(&self.sqrt_lambda) {
                    let z: f64 = rng.sample(StandardNormal);
                    *o = s * z;
                }
            }
            SamplerKind::GammaSym => {
                for (o, &l) in out.iter_mut().zip(self.spectrum.eigenvalues()) {
                    let y = gamma_small_shape(rng, l);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    *o = sign * y.sqrt();
                }
            }
            SamplerKind::CoordinateBounded => {
                out.fill(0.0);
                let i = self.draw_atom(rng);
                out[i] = self.trace.sqrt();
            }
        }
    }

    fn draw_atom(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    /// `M = Σ λ_i = E[‖x‖²]`.
    pub fn second_moment(&self) -> f64 {
        self.trace
    }

    /// Closed-form `E[‖x‖⁴]`.
    pub fn fourth_moment(&self) -> f64 {
        let m = self.trace;
        let lam = self.spectrum.eigenvalues();
        match self.kind {
            SamplerKind::Gff => m * m + 2.0 * compensated_sum(lam.iter().map(|l| l * l)),
            SamplerKind::GammaSym => m * m + m,
            SamplerKind::CoordinateBounded => m * m,
        }
    }

    /// Closed-form `E[x_i⁴]` per coordinate.
    pub fn coordinate_fourth_moment(&self, i: usize) -> f64 {
        let l = self.spectrum.eigenvalues()[i];
        match self.kind {
            SamplerKind::Gff => 3.0 * l * l,
            SamplerKind::GammaSym => l * (1.0 + l),
            SamplerKind::CoordinateBounded => l * self.trace,
        }
    }

    /// Almost-sure bound `M` on `‖x‖²`, when one exists.
    pub fn norm_bound(&self) -> Option<f64> {
        match self.kind {
            SamplerKind::CoordinateBounded => Some(self.trace),
            _ => None,
        }
    }

    /// `δ = inf_{‖z‖=1} E[⟨z, x⟩²] = min λ_i`.
    pub fn delta(&self) -> f64 {
        self.spectrum.smallest()
    }

    /// The finite support `(probability, index, value)` of the
    /// coordinate-bounded sampler; `None` for continuous kinds.
    pub fn atoms(&self) -> Option<Vec<(f64, usize, f64)>> {
        match self.kind {
            SamplerKind::CoordinateBounded => {
                let r = self.trace.sqrt();
                Some(
                    self.spectrum
                        .eigenvalues()
                        .iter()
                        .enumerate()
                        .map(|(i, l)| (l / self.trace, i, r))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Stream used for auxiliary estimators (moments, constants, recursion
    /// checks), disjoint from trajectory replicas.
    pub(crate) fn aux_stream(&self, purpose: u64) -> Stream {
        rng::stream(self.seed, purpose)
    }
}
