use serde::{Deserialize, Serialize};

use super::vector::compensated_sum;
use crate::{Error, Result};

/// Parametric law generating the eigenvalues `λ_1 ≥ λ_2 ≥ …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SpectrumFamily {
    /// `λ_i = c · i^{-p}`
    PowerLaw { c: f64, p: f64 },
    /// `λ_i = c · r^{i-1}`
    Geometric { c: f64, r: f64 },
    /// A literal list, sorted into non-increasing order on construction.
    Explicit { values: Vec<f64> },
}

/// Eigenvalues of the covariance operator, all in `(0, 1/2)` and
/// non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    family: SpectrumFamily,
    scale: f64,
}

/// Builds a spectrum of dimension `d` from `family`.
///
/// When the largest eigenvalue is `≥ 1/2` the whole spectrum is divided by the
/// smallest power of two that brings it strictly below `1/2`. Power-of-two
/// scaling is exact, so eigenvalue ratios are preserved bit for bit. The
/// applied factor is available from [`Spectrum::scale`].
pub fn make_spectrum(family: SpectrumFamily, d: usize) -> Result<Spectrum> {
    if d == 0 {
        return Err(Error::invalid("spectrum dimension d must be >= 1"));
    }
    let mut raw: Vec<f64> = match &family {
        SpectrumFamily::PowerLaw { c, p } => {
            positive("c", *c)?;
            positive("p", *p)?;
            (1..=d).map(|i| c * (i as f64).powf(-p)).collect()
        }
        SpectrumFamily::Geometric { c, r } => {
            positive("c", *c)?;
            positive("r", *r)?;
            if *r > 1.0 {
                return Err(Error::invalid(format!(
                    "geometric ratio r must be in (0, 1], got {r}"
                )));
            }
            (0..d).map(|i| c * r.powi(i as i32)).collect()
        }
        SpectrumFamily::Explicit { values } => {
            if values.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: values.len(),
                });
            }
            for &v in values {
                positive("eigenvalue", v)?;
            }
            values.clone()
        }
    };
    raw.sort_by(|a, b| b.total_cmp(a));
    if let Some(&last) = raw.last() {
        if last <= 0.0 {
            return Err(Error::invalid(format!(
                "eigenvalue underflowed to {last}; reduce d or the decay rate"
            )));
        }
    }

    let mut scale = 1.0;
    while raw[0] * scale >= 0.5 {
        scale *= 0.5;
    }
    if scale != 1.0 {
        raw.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(Spectrum {
        eigenvalues: raw,
        family,
        scale,
    })
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn family(&self) -> &SpectrumFamily {
        &self.family
    }

    /// Factor applied to the raw family values (1 when no rescaling was needed).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `Σ λ_i`, which is `E[‖x‖²]` for every sampler over this spectrum.
    pub fn trace(&self) -> f64 {
        compensated_sum(self.eigenvalues.iter().copied())
    }

    /// `K_β = Σ λ_i^{1-β}`, i.e. `E[φ_β(x)]`.
    pub fn k_sum(&self, beta: f64) -> f64 {
        compensated_sum(self.eigenvalues.iter().map(|l| l.powf(1.0 - beta)))
    }

    /// Same family truncated at a different dimension (used for tail checks).
    pub fn with_dim(&self, d: usize) -> Result<Spectrum> {
        match &self.family {
            SpectrumFamily::Explicit { .. } => Err(Error::invalid(
                "an explicit spectrum cannot be re-truncated",
            )),
            family => make_spectrum(family.clone(), d),
        }
    }
}
