use super::config::IterationConfig;
use super::ensemble::simulate;
use super::trajectory::RunOptions;
use crate::hilbert::{compensated_sum, HilbertVector, Spectrum};
use crate::stats::{Accumulator, Estimate};
use crate::{Error, Result};

/// `h(z) = E[⟨z, x⟩²] = Σ λ_i z_i²`.
pub fn martingale_h(z: &HilbertVector, spec: &Spectrum) -> Result<f64> {
    Error::check_dim(spec.dim(), z.dim())?;
    Ok(compensated_sum(
        z.coeffs().iter().zip(spec.eigenvalues()).map(|(z, l)| l * z * z),
    ))
}

/// Cross-replica means of `M_n = ⟨θ_n/‖θ_n‖, x_{n+1}⟩² − h(θ_n/‖θ_n‖)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleStats {
    /// Recorded steps `n < n_steps`.
    pub steps: Vec<usize>,
    pub means: Vec<Estimate>,
    /// Replicas for which `M_n` was undefined (`θ(n) = 0` or diverged) at each step.
    pub undefined: Vec<usize>,
}

impl MartingaleStats {
    /// Largest `|mean M_n| / SE` across steps.
    pub fn max_z(&self) -> f64 {
        self.means
            .iter()
            .map(|e| e.z_score(0.0))
            .fold(0.0, f64::max)
    }
}

pub fn martingale_diagnostic(config: &IterationConfig) -> Result<MartingaleStats> {
    if config.theta0.is_zero() {
        return Err(Error::invalid("martingale diagnostic needs θ(0) ≠ 0"));
    }
    let records = simulate(
        config,
        RunOptions {
            martingale: true,
            snapshots: false,
        },
    )?;
    let steps: Vec<usize> = config
        .schedule
        .steps()
        .iter()
        .copied()
        .filter(|&n| n < config.n_steps)
        .collect();
    let mut acc = vec![Accumulator::new(); steps.len()];
    let mut undefined = vec![0; steps.len()];
    for rec in &records {
        for k in 0..steps.len() {
            match rec.martingale.get(k).copied().flatten() {
                Some(m) => acc[k].push(m),
                None => undefined[k] += 1,
            }
        }
    }
    Ok(MartingaleStats {
        steps,
        means: acc.iter().map(Accumulator::estimate).collect(),
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Schedule;
    use crate::hilbert::{make_spectrum, SpectrumFamily};
    use crate::sampler::{SamplerKind, SamplerSpec};

    #[test]
    fn h_of_first_basis_vector() {
        let spec = make_spectrum(SpectrumFamily::PowerLaw { c: 0.4, p: 2.0 }, 6).unwrap();
        assert_eq!(martingale_h(&HilbertVector::basis(6, 0), &spec).unwrap(), 0.4);
    }

    #[test]
    fn deterministic_sampler_gives_zero() {
        // λ = 1/4 makes √M = 1/2 exact, so both terms of M_n agree bit for bit
        let spec = make_spectrum(SpectrumFamily::Explicit { values: vec![0.25] }, 1).unwrap();
        let sampler = SamplerSpec::new(SamplerKind::CoordinateBounded, spec, 1);
        let theta0 = HilbertVector::new(vec![0.7]).unwrap();
        let c = IterationConfig::new(sampler, theta0, 0.5, 50)
            .unwrap()
            .with_replicas(3)
            .with_schedule(Schedule::explicit(&[1, 10, 49], 50).unwrap());
        let stats = martingale_diagnostic(&c).unwrap();
        assert_eq!(stats.steps, vec![0, 1, 10, 49]);
        for e in &stats.means {
            assert_eq!(e.mean, 0.0);
        }
    }

    #[test]
    fn gff_mean_is_zero() {
        let d = 30;
        let spec = make_spectrum(SpectrumFamily::PowerLaw { c: 0.4, p: 2.0 }, d).unwrap();
        let sampler = SamplerSpec::new(SamplerKind::Gff, spec, 2);
        let theta0 = HilbertVector::power_law(d, 1.0).normalized();
        let c = IterationConfig::new(sampler, theta0, 0.5, 101)
            .unwrap()
            .with_replicas(3000)
            .with_schedule(Schedule::explicit(&[1, 10, 100], 101).unwrap());
        let stats = martingale_diagnostic(&c).unwrap();
        assert!(stats.max_z() <= 3.0, "{stats:?}");
        assert!(stats.undefined.iter().all(|&u| u == 0));
    }

    #[test]
    fn zero_start_rejected() {
        let spec = make_spectrum(SpectrumFamily::PowerLaw { c: 0.4, p: 2.0 }, 3).unwrap();
        let sampler = SamplerSpec::new(SamplerKind::Gff, spec, 2);
        let c = IterationConfig::new(sampler, HilbertVector::zeros(3), 0.5, 10).unwrap();
        assert!(martingale_diagnostic(&c).is_err());
    }
}
