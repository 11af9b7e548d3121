use crate::hilbert::{HilbertVector, PowerWeights};
use crate::sampler::SamplerSpec;
use crate::{Error, Result};

pub const DEFAULT_SCHEDULE_RATIO: f64 = 1.2;

/// Any coefficient above this magnitude marks a trajectory as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e150;

/// Strictly increasing recording steps, always containing `0` and `n_steps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule(Vec<usize>);

impl Schedule {
    /// `{0} ∪ {⌈r^k⌉ : k ≥ 0} ∪ {n_steps}`, truncated at `n_steps`.
    pub fn geometric(n_steps: usize, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) || !ratio.is_finite() {
            return Err(Error::invalid(format!(
                "schedule ratio must be a finite number > 1, got {ratio}"
            )));
        }
        let mut steps = vec![0];
        let mut k = 0;
        loop {
            let s = ratio.powi(k).ceil();
            if s >= n_steps as f64 {
                break;
            }
            let s = s as usize;
            if s > *steps.last().unwrap() {
                steps.push(s);
            }
            k += 1;
        }
        if n_steps > 0 {
            steps.push(n_steps);
        }
        Ok(Schedule(steps))
    }

    /// The given steps plus `0` and `n_steps`, sorted and de-duplicated.
    pub fn explicit(steps: &[usize], n_steps: usize) -> Result<Self> {
        if let Some(&bad) = steps.iter().find(|&&s| s > n_steps) {
            return Err(Error::invalid(format!(
                "recording step {bad} exceeds n_steps = {n_steps}"
            )));
        }
        let mut all: Vec<usize> = steps.to_vec();
        all.push(0);
        all.push(n_steps);
        all.sort_unstable();
        all.dedup();
        Ok(Schedule(all))
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> usize {
        *self.0.last().unwrap()
    }
}

/// Everything a run of `θ(n+1) = T_{x(n)} θ(n)` needs.
#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub gamma: f64,
    pub n_steps: usize,
    pub n_replicas: usize,
    pub record_betas: Vec<f64>,
    pub schedule: Schedule,
    pub theta0: HilbertVector,
    pub sampler: SamplerSpec,
    /// Also aggregate the coefficient-wise mean of `θ(n)` across replicas.
    pub track_mean: bool,
}

impl IterationConfig {
    /// Single replica, `β = 0` recorded on the default geometric schedule.
    pub fn new(sampler: SamplerSpec, theta0: HilbertVector, gamma: f64, n_steps: usize) -> Result<Self> {
        let config = IterationConfig {
            gamma,
            n_steps,
            n_replicas: 1,
            record_betas: vec![0.0],
            schedule: Schedule::geometric(n_steps, DEFAULT_SCHEDULE_RATIO)?,
            theta0,
            sampler,
            track_mean: false,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_replicas(mut self, n: usize) -> Self {
        self.n_replicas = n;
        self
    }

    pub fn with_betas(mut self, betas: Vec<f64>) -> Self {
        self.record_betas = betas;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_mean_tracking(mut self, on: bool) -> Self {
        self.track_mean = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::invalid(format!(
                "step size must satisfy γ > 0, got {}",
                self.gamma
            )));
        }
        if self.n_steps < 1 {
            return Err(Error::invalid("n_steps must be >= 1"));
        }
        if self.n_replicas < 1 {
            return Err(Error::invalid("n_replicas must be >= 1"));
        }
        Error::check_dim(self.sampler.dim(), self.theta0.dim())?;
        let s = self.schedule.steps();
        if s.first() != Some(&0) || s.last() != Some(&self.n_steps) {
            return Err(Error::invalid(
                "recording schedule must start at 0 and end at n_steps",
            ));
        }
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("recording schedule must be strictly increasing"));
        }
        if self.record_betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("recorded β values must be finite"));
        }
        Ok(())
    }

    pub(crate) fn phi_weights(&self) -> Vec<PowerWeights> {
        self.record_betas
            .iter()
            .map(|&b| PowerWeights::phi(self.sampler.spectrum(), b))
            .collect()
    }
}
