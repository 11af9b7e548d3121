use super::{compensated_sum, Spectrum, SpectrumFamily};
use crate::{Error, Result};

/// Growth ratio between the partial sums at `d/2` and `d` above which a
/// series is flagged as divergent.
pub const DIVERGENCE_RATIO: f64 = 1.05;

/// Regularity exponents of a target / data pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// `α(θ) = sup{β : φ_β(θ) < ∞}` for `θ_i = i^{-s}`; `None` without a
    /// parametric target or for an explicit spectrum.
    pub alpha_theta: Option<f64>,
    /// `sup{β : Σ λ_i^{1-β} < ∞}`; `None` for an explicit spectrum.
    pub alpha_data: Option<f64>,
    pub betas: Vec<f64>,
    /// Tail-growth verdict for `Σ λ_i^{-β} θ_i²`, one per β (empty without a target).
    pub theta_divergent: Vec<bool>,
    /// Tail-growth verdict for `Σ λ_i^{1-β}`, one per β.
    pub data_divergent: Vec<bool>,
}

/// Ratio of the full partial sum to the partial sum over the first half of
/// `terms`.
pub fn tail_growth_ratio(terms: &[f64]) -> f64 {
    let half = terms.len() / 2;
    let head = compensated_sum(terms[..half].iter().copied());
    let full = compensated_sum(terms.iter().copied());
    if head > 0.0 {
        full / head
    } else if full > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Analytic exponents for the spectrum family (and a target `θ_i = i^{-s}`
/// when `theta_s` is given), plus numeric tail-growth flags at each β.
pub fn regularity(spec: &Spectrum, theta_s: Option<f64>, betas: &[f64]) -> Result<RegularityReport> {
    if let Some(s) = theta_s {
        if !(s > 0.5) {
            return Err(Error::invalid(format!(
                "target exponent s must exceed 1/2 for θ to have finite norm, got {s}"
            )));
        }
    }
    let (alpha_data, alpha_theta) = match spec.family() {
        SpectrumFamily::PowerLaw { p, .. } => (Some(1.0 - 1.0 / p), theta_s.map(|s| (2.0 * s - 1.0) / p)),
        // λ_i^{-β} grows exponentially, so no polynomially decaying target has
        // a finite φ_β for β > 0.
        SpectrumFamily::Geometric { .. } => (Some(1.0), theta_s.map(|_| 0.0)),
        SpectrumFamily::Explicit { .. } => (None, None),
    };

    let lambda = spec.eigenvalues();
    let data_divergent = betas
        .iter()
        .map(|&b| {
            let terms: Vec<f64> = lambda.iter().map(|l| l.powf(1.0 - b)).collect();
            tail_growth_ratio(&terms) > DIVERGENCE_RATIO
        })
        .collect();
    let theta_divergent = match theta_s {
        Some(s) => betas
            .iter()
            .map(|&b| {
                let terms: Vec<f64> = lambda
                    .iter()
                    .enumerate()
                    .map(|(i, l)| ((i + 1) as f64).powf(-2.0 * s) * l.powf(-b))
                    .collect();
                tail_growth_ratio(&terms) > DIVERGENCE_RATIO
            })
            .collect(),
        None => Vec::new(),
    };

    Ok(RegularityReport {
        alpha_theta,
        alpha_data,
        betas: betas.to_vec(),
        theta_divergent,
        data_divergent,
    })
}
