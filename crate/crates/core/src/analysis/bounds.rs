use rayon::prelude::*;

use super::check::BoundCheck;
use crate::dynamics::mean_iterate_phi;
use crate::hilbert::{phi_norm, HilbertVector, Spectrum};
use crate::{Error, Result};

/// Growth factor over the last decade above which `u(n)` is declared
/// unbounded. A desk-scale proxy for divergence, not a proof.
pub const UNBOUNDED_GROWTH: f64 = 2.0;

/// `sup_λ λ^{β-κ} e^{-2nγλ}` times `φ_β(θ0)`, an upper bound on
/// `‖T^n θ0‖_κ²` for every `n ≥ 1`.
pub fn avg_upper_bound(
    theta0: &HilbertVector,
    spec: &Spectrum,
    gamma: f64,
    beta: f64,
    kappa: f64,
    n: usize,
) -> Result<f64> {
    if !(kappa < beta) {
        return Err(Error::invalid(format!("need κ < β, got κ = {kappa}, β = {beta}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("step size must satisfy γ > 0, got {gamma}")));
    }
    let phi = phi_norm(theta0, spec, beta)?;
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    let tau = beta - kappa;
    let log_bound = -tau + tau * (tau / (2.0 * n as f64 * gamma)).ln();
    Ok(log_bound.exp() * phi)
}

/// Checks `‖T^n θ0‖_κ² ≤ avg_upper_bound` and `‖T^n θ0‖_κ² ≤ ‖θ0‖_κ²` for
/// every `β` in `betas` and every `n` in `ns`.
pub fn check_avg_upper_bound(
    theta0: &HilbertVector,
    spec: &Spectrum,
    gamma: f64,
    betas: &[f64],
    kappa: f64,
    ns: &[usize],
) -> Result<BoundCheck> {
    let start = mean_iterate_phi(theta0, spec, gamma, 0, kappa)?;
    let mut check = BoundCheck::new("avg_upper_bound");
    for &beta in betas {
        let rows: Vec<Result<(f64, f64)>> = ns
            .par_iter()
            .map(|&n| {
                let lhs = mean_iterate_phi(theta0, spec, gamma, n, kappa)?;
                Ok((lhs, avg_upper_bound(theta0, spec, gamma, beta, kappa, n)?))
            })
            .collect();
        for row in rows {
            let (lhs, bound) = row?;
            check.record_relative(bound, lhs, 1e-12);
            check.record_relative(start, lhs, 1e-12);
        }
    }
    Ok(check)
}

/// Slowly increasing sequences `t_n` used by the lower-bound probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowSequence {
    /// `t_n = n^ε`
    Power(f64),
    /// `t_n = (ln n)^{1+ε}`
    LogPower(f64),
}

impl SlowSequence {
    pub fn eval(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            SlowSequence::Power(eps) => n.powf(eps),
            SlowSequence::LogPower(eps) => n.ln().powf(1.0 + eps),
        }
    }
}

impl Default for SlowSequence {
    fn default() -> Self {
        SlowSequence::Power(0.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProbe {
    pub verdict: Verdict,
    /// `u(n_max) / u(n_max / 10)`.
    pub growth: f64,
    /// `(n, u(n))` on a geometric grid up to `n_max`.
    pub samples: Vec<(usize, f64)>,
}

/// Evaluates `u(n) = n^{β-κ} t_n ‖T^n θ0‖_κ²` and reports whether it is
/// still growing by at least [`UNBOUNDED_GROWTH`] over the last decade.
pub fn lower_bound_probe(
    theta0: &HilbertVector,
    spec: &Spectrum,
    gamma: f64,
    beta: f64,
    kappa: f64,
    t: SlowSequence,
    n_max: usize,
) -> Result<GrowthProbe> {
    if !(kappa < beta) {
        return Err(Error::invalid(format!("need κ < β, got κ = {kappa}, β = {beta}")));
    }
    if n_max < 20 {
        return Err(Error::invalid(format!("n_max must be at least 20, got {n_max}")));
    }
    let u = |n: usize| -> Result<f64> {
        let phi = mean_iterate_phi(theta0, spec, gamma, n, kappa)?;
        Ok((n as f64).powf(beta - kappa) * t.eval(n) * phi)
    };
    let mut grid: Vec<usize> = Vec::new();
    let mut n = n_max;
    while n >= 2 {
        grid.push(n);
        n /= 10;
    }
    grid.reverse();
    let samples = grid
        .iter()
        .map(|&n| Ok((n, u(n)?)))
        .collect::<Result<Vec<_>>>()?;
    let last = u(n_max)?;
    let prev = u(n_max / 10)?;
    let growth = last / prev;
    let verdict = if growth >= UNBOUNDED_GROWTH {
        Verdict::Unbounded
    } else {
        Verdict::Bounded
    };
    Ok(GrowthProbe {
        verdict,
        growth,
        samples,
    })
}
