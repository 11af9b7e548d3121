use super::config::{IterationConfig, DIVERGENCE_THRESHOLD};
use crate::hilbert::{compensated_sum, t_x_in_place, PowerWeights};
use crate::Result;

/// Functionals recorded along one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub replica: u64,
    /// Recorded steps actually reached (a diverged run stops early).
    pub steps: Vec<usize>,
    /// `φ_β(θ(n))` per recorded step, one entry per configured β.
    pub values: Vec<Vec<f64>>,
    /// `‖θ(n+1)‖² ≤ ‖θ(n)‖²` held at every step taken.
    pub monotone: bool,
    /// Step at which a coefficient exceeded the divergence threshold.
    pub diverged_at: Option<usize>,
    pub final_norm_sq: f64,
    /// `M_n` at recorded steps `n < n_steps`, `None` once `θ(n) = 0`.
    pub(crate) martingale: Vec<Option<f64>>,
    /// `θ(n)` at recorded steps, when mean tracking is on.
    pub(crate) snapshots: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunOptions {
    pub martingale: bool,
    pub snapshots: bool,
}

/// Runs replica `replica` of `config`, drawing from the sampler stream with
/// the same index. The full history is never kept.
pub fn sgd_trajectory(config: &IterationConfig, replica: u64) -> Result<TrajectoryRecord> {
    config.validate()?;
    let weights = config.phi_weights();
    Ok(run(config, &weights, replica, RunOptions::default()))
}

pub(crate) fn run(
    config: &IterationConfig,
    weights: &[PowerWeights],
    replica: u64,
    opts: RunOptions,
) -> TrajectoryRecord {
    let sampler = &config.sampler;
    let lambda = sampler.spectrum().eigenvalues();
    let steps = config.schedule.steps();
    let mut rng = sampler.stream(replica);
    let mut theta = config.theta0.coeffs().to_vec();
    let mut x = vec![0.0; theta.len()];

    let mut record = TrajectoryRecord {
        replica,
        steps: Vec::with_capacity(steps.len()),
        values: Vec::with_capacity(steps.len()),
        monotone: true,
        diverged_at: None,
        final_norm_sq: 0.0,
        martingale: Vec::new(),
        snapshots: Vec::new(),
    };
    let mut norm_sq = compensated_sum(theta.iter().map(|t| t * t));
    let mut next = 0;

    for n in 0..=config.n_steps {
        let recording = next < steps.len() && steps[next] == n;
        if recording {
            record.steps.push(n);
            record
                .values
                .push(weights.iter().map(|w| w.quadratic(&theta)).collect());
            if opts.snapshots {
                record.snapshots.push(theta.clone());
            }
            next += 1;
        }
        if n == config.n_steps {
            break;
        }

        sampler.sample_into(&mut rng, &mut x);
        let h = if opts.martingale && recording {
            Some(compensated_sum(theta.iter().zip(lambda).map(|(t, l)| l * t * t)))
        } else {
            None
        };
        let proj = t_x_in_place(&mut theta, &x, config.gamma);
        if let Some(h) = h {
            record
                .martingale
                .push((norm_sq > 0.0).then(|| (proj * proj - h) / norm_sq));
        }

        let mut blown = false;
        let new_norm = compensated_sum(theta.iter().map(|&t| {
            blown |= !(t.abs() <= DIVERGENCE_THRESHOLD);
            t * t
        }));
        if blown {
            record.diverged_at = Some(n + 1);
            record.monotone = false;
            norm_sq = f64::INFINITY;
            break;
        }
        if new_norm > norm_sq {
            record.monotone = false;
        }
        norm_sq = new_norm;
    }
    record.final_norm_sq = norm_sq;
    record
}
