use rayon::prelude::*;

use super::config::IterationConfig;
use super::mean::mean_iterate;
use super::trajectory::{run, RunOptions, TrajectoryRecord};
use crate::stats::{Accumulator, Estimate};
use crate::Result;

/// Replicas simulated per parallel batch before the sequential fold.
const BATCH: usize = 64;

/// Cross-replica statistics of `φ_β(θ(n))` at the recorded steps.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub steps: Vec<usize>,
    pub betas: Vec<f64>,
    /// `means[k][j]` estimates `E[φ_{β_j}(θ(steps[k]))]` over surviving replicas.
    pub means: Vec<Vec<Estimate>>,
    /// Per-replica pathwise monotonicity of `‖θ(n)‖²`.
    pub monotone: Vec<bool>,
    /// Per-replica `‖θ(n_steps)‖²` (`+∞` for diverged replicas).
    pub final_norm_sq: Vec<f64>,
    /// `(replica, step)` for every diverged replica.
    pub diverged: Vec<(u64, usize)>,
    /// Coefficient-wise mean of `θ(n)`, present when mean tracking is on.
    pub coefficient_means: Option<Vec<Vec<Estimate>>>,
}

impl EnsembleStats {
    /// `(n, estimate)` pairs for the β at `beta_index`.
    pub fn series(&self, beta_index: usize) -> Vec<(usize, Estimate)> {
        self.steps
            .iter()
            .zip(&self.means)
            .map(|(&n, row)| (n, row[beta_index]))
            .collect()
    }

    pub fn beta_index(&self, beta: f64) -> Option<usize> {
        self.betas.iter().position(|&b| b == beta)
    }

    pub fn all_monotone(&self) -> bool {
        self.monotone.iter().all(|&m| m)
    }

    /// Largest `|mean θ_i(n) − (T^n θ0)_i| / SE` over coordinates and the
    /// requested steps (all recorded steps when `at` is empty), paired with the
    /// step where it occurs.
    pub fn mean_dynamics_z(&self, config: &IterationConfig, at: &[usize]) -> Result<Option<(usize, f64)>> {
        let Some(coef) = &self.coefficient_means else {
            return Ok(None);
        };
        let mut worst: Option<(usize, f64)> = None;
        for (&n, row) in self.steps.iter().zip(coef) {
            if !at.is_empty() && !at.contains(&n) {
                continue;
            }
            let target = mean_iterate(&config.theta0, config.sampler.spectrum(), config.gamma, n)?;
            for (e, t) in row.iter().zip(target.coeffs()) {
                let z = e.z_score(*t);
                if worst.is_none_or(|(_, w)| z > w) {
                    worst = Some((n, z));
                }
            }
        }
        Ok(worst)
    }
}

pub(crate) fn simulate(config: &IterationConfig, opts: RunOptions) -> Result<Vec<TrajectoryRecord>> {
    config.validate()?;
    let weights = config.phi_weights();
    let mut out = Vec::with_capacity(config.n_replicas);
    for start in (0..config.n_replicas).step_by(BATCH) {
        let end = (start + BATCH).min(config.n_replicas);
        let batch: Vec<TrajectoryRecord> = (start..end)
            .into_par_iter()
            .map(|r| run(config, &weights, r as u64, opts))
            .collect();
        out.extend(batch);
    }
    Ok(out)
}

/// Runs `n_replicas` independent trajectories and aggregates them in
/// ascending replica order. Diverged replicas are excluded from the means and
/// listed in [`EnsembleStats::diverged`].
pub fn ensemble(config: &IterationConfig) -> Result<EnsembleStats> {
    let opts = RunOptions {
        martingale: false,
        snapshots: config.track_mean,
    };
    config.validate()?;
    let steps = config.schedule.steps().to_vec();
    let nb = config.record_betas.len();
    let d = config.theta0.dim();
    let mut acc = vec![vec![Accumulator::new(); nb]; steps.len()];
    let mut coef_acc = config
        .track_mean
        .then(|| vec![vec![Accumulator::new(); d]; steps.len()]);
    let mut monotone = Vec::with_capacity(config.n_replicas);
    let mut final_norm_sq = Vec::with_capacity(config.n_replicas);
    let mut diverged = Vec::new();

    // batches are folded as they finish so snapshots never pile up
    let weights = config.phi_weights();
    for start in (0..config.n_replicas).step_by(BATCH) {
        let end = (start + BATCH).min(config.n_replicas);
        let batch: Vec<TrajectoryRecord> = (start..end)
            .into_par_iter()
            .map(|r| run(config, &weights, r as u64, opts))
            .collect();
        for rec in batch {
            monotone.push(rec.monotone);
            final_norm_sq.push(rec.final_norm_sq);
            if let Some(step) = rec.diverged_at {
                diverged.push((rec.replica, step));
                continue;
            }
            for (row, vals) in acc.iter_mut().zip(&rec.values) {
                for (a, v) in row.iter_mut().zip(vals) {
                    a.push(*v);
                }
            }
            if let Some(coef) = coef_acc.as_mut() {
                for (row, snap) in coef.iter_mut().zip(&rec.snapshots) {
                    for (a, v) in row.iter_mut().zip(snap) {
                        a.push(*v);
                    }
                }
            }
        }
    }

    Ok(EnsembleStats {
        steps,
        betas: config.record_betas.clone(),
        means: acc
            .iter()
            .map(|row| row.iter().map(Accumulator::estimate).collect())
            .collect(),
        monotone,
        final_norm_sq,
        diverged,
        coefficient_means: coef_acc.map(|c| {
            c.iter()
                .map(|row| row.iter().map(Accumulator::estimate).collect())
                .collect()
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{sgd_trajectory, Schedule};
    use crate::hilbert::{make_spectrum, phi_norm, HilbertVector, SpectrumFamily};
    use crate::sampler::{SamplerKind, SamplerSpec};

    fn config(kind: SamplerKind, d: usize, gamma: f64, n: usize, replicas: usize) -> IterationConfig {
        let spec = make_spectrum(SpectrumFamily::PowerLaw { c: 0.4, p: 2.0 }, d).unwrap();
        let theta0 = HilbertVector::power_law(d, 1.0).normalized();
        IterationConfig::new(SamplerSpec::new(kind, spec, 17), theta0, gamma, n)
            .unwrap()
            .with_replicas(replicas)
            .with_betas(vec![0.0, 1.0])
    }

    #[test]
    fn single_replica_matches_trajectory() {
        let c = config(SamplerKind::GammaSym, 25, 0.8, 300, 1);
        let stats = ensemble(&c).unwrap();
        let traj = sgd_trajectory(&c, 0).unwrap();
        for (row, vals) in stats.means.iter().zip(&traj.values) {
            for (e, v) in row.iter().zip(vals) {
                assert_eq!(e.mean, *v);
                assert_eq!(e.stderr, 0.0);
            }
        }
    }

    #[test]
    fn one_step_mean_matches_recursion_closed_form() {
        // E‖T_xθ‖² = ‖θ‖² − 2γφ_{-1}(θ) + γ² E[⟨θ,x⟩²‖x‖²]; the last term is
        // φ_{-1}(θ)·K_0 + 2Σθ_i²λ_i² for Gaussian coordinates.
        let d = 50;
        let gamma = 0.2;
        let c = config(SamplerKind::Gff, d, gamma, 1, 20_000);
        let stats = ensemble(&c).unwrap();
        let spec = c.sampler.spectrum();
        let t = &c.theta0;
        let phi_m1 = phi_norm(t, spec, -1.0).unwrap();
        let fourth: f64 = t
            .coeffs()
            .iter()
            .zip(spec.eigenvalues())
            .map(|(t, l)| 2.0 * t * t * l * l)
            .sum();
        let want = t.norm_sq() - 2.0 * gamma * phi_m1 + gamma * gamma * (phi_m1 * spec.trace() + fourth);
        let got = stats.series(0)[1].1;
        assert!(got.agrees_with(want, 4.0), "{got:?} vs {want}");
    }

    #[test]
    fn mean_of_iterates_follows_mean_dynamics() {
        let d = 20;
        let c = config(SamplerKind::GammaSym, d, 0.9, 100, 4000)
            .with_schedule(Schedule::explicit(&[10, 100], 100).unwrap())
            .with_mean_tracking(true);
        let stats = ensemble(&c).unwrap();
        let (_, z) = stats.mean_dynamics_z(&c, &[10, 100]).unwrap().unwrap();
        assert!(z < 4.0, "max z = {z}");
    }

    #[test]
    fn diverged_replicas_are_reported() {
        let c = config(SamplerKind::Gff, 10, 300.0, 2000, 4);
        let stats = ensemble(&c).unwrap();
        assert_eq!(stats.diverged.len(), 4);
        assert!(stats.means.iter().flatten().all(|e| e.count == 0));
    }

    #[test]
    fn reproducible_across_runs() {
        let c = config(SamplerKind::GammaSym, 30, 0.7, 400, 130);
        assert_eq!(ensemble(&c).unwrap(), ensemble(&c).unwrap());
    }
}
