use rand::Rng;

use super::{SamplerKind, SamplerSpec};
use crate::hilbert::{compensated_sum, phi_norm, HilbertVector, PowerWeights};
use crate::rng::{self, purpose};
use crate::stats::{Accumulator, Estimate};
use crate::{Error, Result};

/// Monte Carlo moments of a sampler.
#[derive(Debug, Clone)]
pub struct MomentReport {
    /// Estimates of `E[x_i²]`, one per coordinate.
    pub mean_sq_coords: Vec<Estimate>,
    /// Estimates of `E[x_i x_j]` for the probed pairs `(i, j)`.
    pub cross_corr: Vec<(usize, usize, Estimate)>,
    /// `E[‖x‖²]`
    pub m2: Estimate,
    /// `E[‖x‖⁴]`
    pub m4: Estimate,
    /// `min_i λ_i`, computed analytically.
    pub delta: f64,
}

impl MomentReport {
    /// The probed pair with the largest `|E[x_i x_j]|`.
    pub fn max_cross_corr(&self) -> Option<&(usize, usize, Estimate)> {
        self.cross_corr
            .iter()
            .max_by(|a, b| a.2.mean.abs().total_cmp(&b.2.mean.abs()))
    }
}

/// Pairs `(i, i+1)` plus `(0, d-1)`.
fn probed_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..d.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if d > 2 {
        pairs.push((0, d - 1));
    }
    pairs
}

pub fn moment_report(spec: &SamplerSpec, n_samples: usize) -> Result<MomentReport> {
    if n_samples < 100 {
        return Err(Error::invalid(format!(
            "moment_report needs at least 100 samples, got {n_samples}"
        )));
    }
    let d = spec.dim();
    let pairs = probed_pairs(d);
    let mut coord = vec![Accumulator::new(); d];
    let mut cross = vec![Accumulator::new(); pairs.len()];
    let mut m2 = Accumulator::new();
    let mut m4 = Accumulator::new();

    let mut rng = spec.aux_stream(purpose::MOMENTS);
    let mut x = vec![0.0; d];
    for _ in 0..n_samples {
        spec.sample_into(&mut rng, &mut x);
        for (a, v) in coord.iter_mut().zip(&x) {
            a.push(v * v);
        }
        for (a, &(i, j)) in cross.iter_mut().zip(&pairs) {
            a.push(x[i] * x[j]);
        }
        let n2 = compensated_sum(x.iter().map(|v| v * v));
        m2.push(n2);
        m4.push(n2 * n2);
    }

    Ok(MomentReport {
        mean_sq_coords: coord.iter().map(Accumulator::estimate).collect(),
        cross_corr: pairs
            .iter()
            .zip(&cross)
            .map(|(&(i, j), a)| (i, j, a.estimate()))
            .collect(),
        m2: m2.estimate(),
        m4: m4.estimate(),
        delta: spec.delta(),
    })
}

/// Closed-form `E[⟨θ, x⟩² φ_β(x)]`.
///
/// For the coordinate-bounded sampler this enumerates the `d` atoms. For the
/// independent kinds, expanding the product leaves only the diagonal
/// fourth-moment terms:
/// `φ_{-1}(θ)·K_β + Σ θ_i² λ_i^{-β} (E[x_i⁴] − λ_i²)`.
pub fn assumption3_lhs(spec: &SamplerSpec, theta: &HilbertVector, beta: f64) -> Result<f64> {
    Error::check_dim(spec.dim(), theta.dim())?;
    let lam = spec.spectrum().eigenvalues();
    let t = theta.coeffs();
    match spec.kind() {
        SamplerKind::CoordinateBounded => {
            let weights = PowerWeights::phi(spec.spectrum(), beta);
            let mut atom = vec![0.0; spec.dim()];
            let terms = spec.atoms().unwrap().into_iter().map(|(p, i, v)| {
                atom[i] = v;
                let proj = t[i] * v;
                let value = p * proj * proj * weights.quadratic(&atom);
                atom[i] = 0.0;
                value
            });
            Ok(compensated_sum(terms.collect::<Vec<_>>()))
        }
        SamplerKind::Gff | SamplerKind::GammaSym => {
            let phi_m1 = phi_norm(theta, spec.spectrum(), -1.0)?;
            let k = spec.spectrum().k_sum(beta);
            let diag = compensated_sum((0..lam.len()).map(|i| {
                let excess = spec.coordinate_fourth_moment(i) - lam[i] * lam[i];
                t[i] * t[i] * lam[i].powf(-beta) * excess
            }));
            Ok(phi_m1 * k + diag)
        }
    }
}

/// Ratio `E[⟨θ,x⟩² φ_β(x)] / φ_{β-1}(θ)` for one probe.
#[derive(Debug, Clone)]
pub struct ProbeRatio {
    /// Position of the probe in the input list.
    pub probe: usize,
    pub ratio: Estimate,
    pub analytic: f64,
}

#[derive(Debug, Clone)]
pub struct Assumption3Estimate {
    pub beta: f64,
    pub per_probe: Vec<ProbeRatio>,
    /// Probe with the largest Monte Carlo ratio.
    pub sup: ProbeRatio,
    /// Largest closed-form ratio over the probes.
    pub analytic_sup: f64,
    /// Known closed-form constant valid for all θ: `K_β + 1` for gamma-sym,
    /// `M` for coordinate-bounded.
    pub analytic_constant: Option<f64>,
    /// Probes dropped because `φ_{β-1}(θ)` was zero or not finite.
    pub skipped: Vec<usize>,
}

/// Basis vectors `e_1…e_d` followed by `n_random` unit vectors with random
/// signs and magnitudes `i^{-s}`, `s` uniform on `[0.6, 2.5]`.
pub fn default_probes(d: usize, n_random: usize, seed: u64) -> Vec<HilbertVector> {
    let mut probes: Vec<HilbertVector> = (0..d).map(|i| HilbertVector::basis(d, i)).collect();
    let mut rng = rng::stream(seed, purpose::PROBES);
    for _ in 0..n_random {
        let s = rng.random_range(0.6..2.5);
        let coeffs = (1..=d)
            .map(|i| {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * (i as f64).powf(-s)
            })
            .collect();
        probes.push(HilbertVector::from_raw(coeffs).normalized());
    }
    probes
}

/// Expected number of "hits" a basis probe `e_i` needs before its Monte
/// Carlo ratio is trusted.
pub const MIN_PROBE_HITS: f64 = 1000.0;

/// [`default_probes`] without the basis vectors whose ratio a run of
/// `n_samples` cannot resolve. For gamma-sym and coordinate-bounded the
/// numerator for `e_i` is carried by events of probability about `λ_i`
/// (`λ_i / M` for coordinate-bounded), so `e_i` is kept only when
/// `n_samples` times that probability reaches [`MIN_PROBE_HITS`]. Gaussian
/// coordinates have light tails and keep every basis vector.
pub fn resolvable_probes(spec: &SamplerSpec, n_random: usize, n_samples: usize) -> Vec<HilbertVector> {
    let d = spec.dim();
    let lambda = spec.spectrum().eigenvalues();
    let m = spec.spectrum().trace();
    let keep = |i: usize| match spec.kind() {
        SamplerKind::Gff => true,
        SamplerKind::GammaSym => n_samples as f64 * lambda[i] >= MIN_PROBE_HITS,
        SamplerKind::CoordinateBounded => n_samples as f64 * lambda[i] / m >= MIN_PROBE_HITS,
    };
    default_probes(d, n_random, spec.seed())
        .into_iter()
        .enumerate()
        .filter(|(k, _)| *k >= d || keep(*k))
        .map(|(_, p)| p)
        .collect()
}

struct SparseProbe {
    index: usize,
    entries: Vec<(usize, f64)>,
    denom: f64,
    acc: Accumulator,
}

/// Monte Carlo estimate of the smallest `C_β` with
/// `E[⟨θ,x⟩² φ_β(x)] ≤ C_β φ_{β-1}(θ)` over the given probes.
pub fn assumption3_constant(
    spec: &SamplerSpec,
    beta: f64,
    probes: &[HilbertVector],
    n_samples: usize,
) -> Result<Assumption3Estimate> {
    if n_samples < 2 {
        return Err(Error::invalid("assumption3_constant needs at least 2 samples"));
    }
    let mut skipped = Vec::new();
    let mut active = Vec::new();
    for (index, p) in probes.iter().enumerate() {
        Error::check_dim(spec.dim(), p.dim())?;
        let denom = phi_norm(p, spec.spectrum(), beta - 1.0)?;
        if denom > 0.0 && denom.is_finite() {
            active.push(SparseProbe {
                index,
                entries: p
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(i, c)| (i, *c))
                    .collect(),
                denom,
                acc: Accumulator::new(),
            });
        } else {
            skipped.push(index);
        }
    }
    if active.is_empty() {
        return Err(Error::InsufficientData(
            "every probe has φ_{β-1}(θ) = 0; nothing to estimate".into(),
        ));
    }

    let weights = PowerWeights::phi(spec.spectrum(), beta);
    let mut rng = spec.aux_stream(purpose::ASSUMPTION3);
    let mut x = vec![0.0; spec.dim()];
    for _ in 0..n_samples {
        spec.sample_into(&mut rng, &mut x);
        let phi_x = weights.quadratic(&x);
        for probe in &mut active {
            let proj = compensated_sum(probe.entries.iter().map(|&(i, c)| c * x[i]));
            probe.acc.push(proj * proj * phi_x);
        }
    }

    let per_probe: Vec<ProbeRatio> = active
        .iter()
        .map(|p| {
            let analytic = assumption3_lhs(spec, &probes[p.index], beta)? / p.denom;
            Ok(ProbeRatio {
                probe: p.index,
                ratio: p.acc.estimate().scaled(1.0 / p.denom),
                analytic,
            })
        })
        .collect::<Result<_>>()?;
    let sup = per_probe
        .iter()
        .max_by(|a, b| a.ratio.mean.total_cmp(&b.ratio.mean))
        .cloned()
        .unwrap();
    let analytic_sup = per_probe
        .iter()
        .map(|p| p.analytic)
        .fold(f64::NEG_INFINITY, f64::max);
    let analytic_constant = match spec.kind() {
        SamplerKind::GammaSym => Some(spec.spectrum().k_sum(beta) + 1.0),
        SamplerKind::CoordinateBounded => Some(spec.second_moment()),
        SamplerKind::Gff => None,
    };

    Ok(Assumption3Estimate {
        beta,
        per_probe,
        sup,
        analytic_sup,
        analytic_constant,
        skipped,
    })
}
