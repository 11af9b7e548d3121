use super::check::BoundCheck;
use super::rate::{fit_decay_rate, RateEstimate};
use crate::dynamics::{mean_iterate_phi, EnsembleStats, IterationConfig};
use crate::stats::Estimate;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SgdRateReport {
    pub kappa: f64,
    /// Fitted exponent of `E[φ_κ(θ(n))]`.
    pub rate: RateEstimate,
    /// Fitted exponent of the mean-iterate lower bound `‖T^n θ0‖_κ²`.
    pub mean_iterate_rate: RateEstimate,
    /// `−(β_target − κ − slack)`; the rate passes when its exponent is at most this.
    pub threshold: f64,
    pub rate_ok: bool,
    /// `E[φ_κ(θ(n))] ≥ ‖T^n θ0‖_κ² − 4 SE` at every recorded step.
    pub lower_bound: BoundCheck,
}

impl SgdRateReport {
    /// Mean-iterate exponent ≤ stochastic exponent ≤ threshold.
    pub fn sandwich_holds(&self) -> bool {
        self.mean_iterate_rate.exponent <= self.rate.exponent + 2.0 * self.rate.stderr && self.rate_ok
    }

    pub fn passed(&self) -> bool {
        self.rate_ok && self.lower_bound.passed()
    }
}

/// Fits the decay of the recorded `E[φ_κ(θ(n))]` over `window` and compares
/// it with `n^{-(β_target − κ)}` and with the deterministic mean iterate.
pub fn sgd_rate_report(
    stats: &EnsembleStats,
    config: &IterationConfig,
    beta_target: f64,
    kappa: f64,
    window: (f64, f64),
    slack: f64,
) -> Result<SgdRateReport> {
    let j = stats
        .beta_index(kappa)
        .ok_or_else(|| Error::invalid(format!("no recorded series for κ = {kappa}")))?;
    let series = stats.series(j);
    let points: Vec<(f64, f64)> = series.iter().map(|(n, e)| (*n as f64, e.mean)).collect();
    let rate = fit_decay_rate(&points, window)?;

    let spec = config.sampler.spectrum();
    let mut mean_points = Vec::with_capacity(series.len());
    let mut lower_bound = BoundCheck::new(format!("jensen(kappa={kappa})"));
    for &(n, Estimate { mean, stderr, .. }) in &series {
        let det = mean_iterate_phi(&config.theta0, spec, config.gamma, n, kappa)?;
        mean_points.push((n as f64, det));
        lower_bound.record(mean + 4.0 * stderr - det);
    }
    let mean_iterate_rate = fit_decay_rate(&mean_points, window)?;
    let threshold = -(beta_target - kappa - slack);
    Ok(SgdRateReport {
        kappa,
        rate,
        mean_iterate_rate,
        threshold,
        rate_ok: rate.exponent <= threshold,
        lower_bound,
    })
}

/// Checks that consecutive recorded means do not increase by more than `k`
/// combined standard errors.
pub fn check_nonincreasing(series: &[(usize, Estimate)], k: f64) -> BoundCheck {
    let mut check = BoundCheck::new("nonincreasing");
    for w in series.windows(2) {
        let (a, b) = (w[0].1, w[1].1);
        check.record(a.mean - b.mean + k * a.stderr.hypot(b.stderr));
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ensemble, Schedule};
    use crate::hilbert::{make_spectrum, HilbertVector, SpectrumFamily};
    use crate::sampler::{SamplerKind, SamplerSpec};

    fn config(d: usize, gamma: f64, n: usize, replicas: usize) -> IterationConfig {
        let spectrum = make_spectrum(SpectrumFamily::PowerLaw { c: 1.0, p: 2.0 }, d).unwrap();
        let sampler = SamplerSpec::new(SamplerKind::GammaSym, spectrum, 9);
        IterationConfig::new(sampler, HilbertVector::power_law(d, 2.0), gamma, n)
            .unwrap()
            .with_replicas(replicas)
            .with_betas(vec![0.0])
            .with_schedule(Schedule::geometric(n, 1.2).unwrap())
    }

    #[test]
    fn constant_series_has_zero_exponent() {
        let cfg = config(10, 0.05, 1000, 1);
        let steps = cfg.schedule.steps().to_vec();
        let stats = EnsembleStats {
            means: steps.iter().map(|_| vec![Estimate::exact(2.0)]).collect(),
            steps,
            betas: vec![0.0],
            monotone: vec![true],
            final_norm_sq: vec![2.0],
            diverged: vec![],
            coefficient_means: None,
        };
        let r = sgd_rate_report(&stats, &cfg, 1.0, 0.0, (10.0, 1000.0), 0.15).unwrap();
        assert_eq!(r.rate.exponent, 0.0);
        assert!(!r.rate_ok);
        assert!(r.lower_bound.passed());
    }

    #[test]
    fn small_gamma_sym_run_decays() {
        let d = 30;
        let cfg = config(d, 1.0 / (d as f64 + 1.0), 3000, 64);
        let stats = ensemble(&cfg).unwrap();
        let r = sgd_rate_report(&stats, &cfg, 1.0, 0.0, (100.0, 3000.0), 0.15).unwrap();
        assert!(r.lower_bound.passed(), "{:?}", r.lower_bound);
        assert!(r.rate.exponent < 0.0);
        assert!(r.mean_iterate_rate.exponent < 0.0);
        assert!(check_nonincreasing(&stats.series(0), 2.0).passed());
    }

    #[test]
    fn missing_kappa_series() {
        let cfg = config(10, 0.05, 100, 2);
        let stats = ensemble(&cfg).unwrap();
        assert!(sgd_rate_report(&stats, &cfg, 1.0, 0.5, (10.0, 100.0), 0.15).is_err());
    }
}
