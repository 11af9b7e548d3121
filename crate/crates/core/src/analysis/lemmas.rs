use rand::Rng;
use rayon::prelude::*;

use super::check::BoundCheck;
use super::special::gamma_function;
use crate::hilbert::{compensated_sum, HilbertVector, PowerWeights, Spectrum};
use crate::rng::{self, purpose};
use crate::sampler::{assumption3_constant, moment_report, resolvable_probes, SamplerSpec};
use crate::stats::Estimate;
use crate::{Error, Result};

/// `f(λ) = |1 − λ|^m λ^τ`, evaluated in log space.
fn f_lambda(m: f64, tau: f64, lambda: f64) -> f64 {
    if lambda <= 0.0 || lambda == 1.0 {
        return 0.0;
    }
    (m * (1.0 - lambda).abs().ln() + tau * lambda.ln()).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FLambdaReport {
    pub m: f64,
    pub tau: f64,
    /// `τ / (m + τ)`
    pub lambda_star: f64,
    pub f_star: f64,
    pub grid_argmax: f64,
    /// `e^{-τe/(e-1)} (τ/m)^τ`
    pub lower: f64,
    /// `e^{-τ} (τ/m)^τ`
    pub upper: f64,
    pub check: BoundCheck,
}

/// Locates the maximum of `f` on the grid `k / grid_size` in `(0, 1)` and
/// checks it against `λ*`, then checks `lower ≤ f(λ*) ≤ upper`.
pub fn f_lambda_verify(m: f64, tau: f64, grid_size: usize) -> Result<FLambdaReport> {
    if !(m > 0.0 && tau > 0.0) {
        return Err(Error::invalid(format!("need m, τ > 0, got m = {m}, τ = {tau}")));
    }
    if grid_size < 2 {
        return Err(Error::invalid("grid_size must be at least 2"));
    }
    let h = 1.0 / grid_size as f64;
    let (k_best, _) = (1..grid_size)
        .map(|k| (k, f_lambda(m, tau, k as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let grid_argmax = k_best as f64 * h;
    let lambda_star = tau / (m + tau);
    let f_star = f_lambda(m, tau, lambda_star);
    let e = std::f64::consts::E;
    let log_ratio = tau * (tau / m).ln();
    let lower = (-tau * e / (e - 1.0) + log_ratio).exp();
    let upper = (-tau + log_ratio).exp();

    let mut check = BoundCheck::new(format!("f_lambda(m={m}, tau={tau})"));
    check.record(h * (1.0 + 1e-9) - (grid_argmax - lambda_star).abs());
    check.record_relative(f_star, lower, 1e-12);
    check.record_relative(upper, f_star, 1e-12);
    Ok(FLambdaReport {
        m,
        tau,
        lambda_star,
        f_star,
        grid_argmax,
        lower,
        upper,
        check,
    })
}

/// Checks `f(λ) ≤ e^{-τ}(τ/m)^τ` on a uniform grid over `[0, 2 − ε]`.
pub fn f_lambda_extended_verify(m: f64, tau: f64, eps: f64, grid_size: usize) -> Result<BoundCheck> {
    if !(m > 0.0 && tau > 0.0) || !(eps > 0.0 && eps < 2.0) {
        return Err(Error::invalid(format!(
            "need m, τ > 0 and ε in (0, 2), got m = {m}, τ = {tau}, ε = {eps}"
        )));
    }
    let upper = (-tau + tau * (tau / m).ln()).exp();
    let top = 2.0 - eps;
    let mut check = BoundCheck::new(format!("f_lambda_extended(m={m}, tau={tau}, eps={eps})"));
    for k in 0..=grid_size {
        let lambda = top * k as f64 / grid_size as f64;
        check.record_relative(upper, f_lambda(m, tau, lambda), 1e-12);
    }
    Ok(check)
}

/// `Σ_{n≥1} (1 − μ)^n (nμ)^κ / n` truncated after `n_terms` terms, and a
/// bound on the neglected tail.
pub fn gamma_series(mu: f64, kappa: f64, n_terms: usize) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < 1.0) || !(kappa > 0.0) || n_terms == 0 {
        return Err(Error::invalid(format!(
            "need μ in (0, 1), κ > 0, n_terms ≥ 1; got μ = {mu}, κ = {kappa}, n_terms = {n_terms}"
        )));
    }
    let l1m = (-mu).ln_1p();
    let term = |n: f64| (n * l1m + kappa * (n * mu).ln() - n.ln()).exp();
    let sum = compensated_sum((1..=n_terms).map(|n| term(n as f64)));
    // successive term ratios beyond n_terms stay below r
    let next = (n_terms + 1) as f64;
    let r = (1.0 - mu) * (1.0 + 1.0 / next).powf(kappa - 1.0).max(1.0);
    let tail = if r < 1.0 { term(next) / (1.0 - r) } else { f64::INFINITY };
    Ok((sum, tail))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSeriesReport {
    /// `(μ, κ, series / Γ(κ))` over the grid.
    pub ratios: Vec<(f64, f64, f64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Largest relative change of the envelope when `n_terms` doubles.
    pub envelope_shift: f64,
    pub check: BoundCheck,
}

/// Ratio of the series to `Γ(κ)` over the grid, its `[min, max]` envelope
/// and the envelope's stability when the truncation point doubles.
pub fn gamma_series_verify(mu_grid: &[f64], kappa_grid: &[f64], n_terms: usize) -> Result<GammaSeriesReport> {
    if mu_grid.iter().any(|&m| !(m > 0.0 && m < 0.5)) {
        return Err(Error::invalid("μ grid must lie in (0, 1/2)"));
    }
    let points: Vec<(f64, f64)> = mu_grid
        .iter()
        .flat_map(|&m| kappa_grid.iter().map(move |&k| (m, k)))
        .collect();
    if points.is_empty() {
        return Err(Error::invalid("empty (μ, κ) grid"));
    }
    let eval = |n_terms: usize| -> Result<Vec<(f64, f64, f64)>> {
        points
            .par_iter()
            .map(|&(mu, kappa)| {
                let (sum, tail) = gamma_series(mu, kappa, n_terms)?;
                if !(tail <= 1e-12 * sum) {
                    return Err(Error::TailNotConverged(format!(
                        "μ = {mu}, κ = {kappa}: tail bound {tail:e} exceeds 1e-12 of the sum {sum:e} \
                         after {n_terms} terms; increase n_terms"
                    )));
                }
                Ok((mu, kappa, sum / gamma_function(kappa)?))
            })
            .collect()
    };
    let envelope = |r: &[(f64, f64, f64)]| {
        r.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.2), hi.max(p.2)))
    };
    let ratios = eval(n_terms)?;
    let doubled = eval(2 * n_terms)?;
    let (min_ratio, max_ratio) = envelope(&ratios);
    let (min2, max2) = envelope(&doubled);
    let envelope_shift = ((min2 - min_ratio) / min_ratio)
        .abs()
        .max(((max2 - max_ratio) / max_ratio).abs());

    let mut check = BoundCheck::new("gamma_series");
    for &(_, _, r) in &ratios {
        // bounded away from 0 and ∞
        check.record(if r.is_finite() { r } else { f64::NAN });
    }
    check.record(0.01 - envelope_shift);
    Ok(GammaSeriesReport {
        ratios,
        min_ratio,
        max_ratio,
        envelope_shift,
        check,
    })
}

/// Iterates `a_{n+1} = a_n − a_n^{1+w}` and checks
/// `a_n ≤ a_0 (1 + n w a_0^w)^{-1/w}` for `n ≤ n_max`, then the same for
/// `c_{n+1} = c_n − K c_n^{1+w}` with `K = 1/2`.
pub fn neutral_recursion_verify(a0: f64, w: f64, n_max: usize) -> Result<BoundCheck> {
    if !(a0 > 0.0 && a0 < 1.0) || !(w > 0.0) {
        return Err(Error::invalid(format!("need a0 in (0, 1) and w > 0, got a0 = {a0}, w = {w}")));
    }
    let mut check = BoundCheck::new(format!("neutral_recursion(a0={a0}, w={w})"));
    for k in [1.0, 0.5] {
        let mut a = a0;
        let a0w = a0.powf(w);
        for n in 0..=n_max {
            let bound = a0 * (1.0 + n as f64 * w * k * a0w).powf(-1.0 / w);
            check.record_relative(bound, a, 1e-12);
            a -= k * a.powf(1.0 + w);
        }
    }
    Ok(check)
}

/// Checks `φ_κ ≤ φ_β^p φ_α^{1-p}` with `p = (α − κ)/(α − β)` and its
/// rearrangement `φ_β ≥ φ_κ^{1/p} φ_α^{1-1/p}` on basis vectors and
/// `n_random` random vectors per triple.
pub fn holder_verify(
    spec: &Spectrum,
    n_random: usize,
    triples: &[(f64, f64, f64)],
    seed: u64,
) -> Result<BoundCheck> {
    let d = spec.dim();
    let mut rng = rng::stream(seed, purpose::HOLDER);
    let mut vectors: Vec<HilbertVector> = (0..d).map(|i| HilbertVector::basis(d, i)).collect();
    for _ in 0..n_random {
        let s = rng.random_range(0.6..2.5);
        let coeffs = (1..=d)
            .map(|i| {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * rng.random_range(0.5..1.5) * (i as f64).powf(-s)
            })
            .collect();
        vectors.push(HilbertVector::new(coeffs)?);
    }
    let mut check = BoundCheck::new("holder");
    for &(beta, kappa, alpha) in triples {
        if !(beta <= kappa && kappa < alpha) {
            return Err(Error::invalid(format!(
                "need β ≤ κ < α, got ({beta}, {kappa}, {alpha})"
            )));
        }
        let p = (alpha - kappa) / (alpha - beta);
        let (wb, wk, wa) = (
            PowerWeights::phi(spec, beta),
            PowerWeights::phi(spec, kappa),
            PowerWeights::phi(spec, alpha),
        );
        for v in &vectors {
            let (fb, fk, fa) = (wb.quadratic(v.coeffs()), wk.quadratic(v.coeffs()), wa.quadratic(v.coeffs()));
            check.record_relative(fb.powf(p) * fa.powf(1.0 - p), fk, 1e-12);
            // φ_κ^{1/p} φ_α^{1-1/p} ≤ φ_β
            check.record_relative(fb, fk.powf(1.0 / p) * fa.powf(1.0 - 1.0 / p), 1e-12);
        }
    }
    Ok(check)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentChain {
    pub m2: Estimate,
    pub m4: Estimate,
    /// Assumption-3 constant at `β = 0` (supremum over the resolvable probes).
    pub c0: Estimate,
    pub check: BoundCheck,
}

/// Checks `E[‖x‖²]² ≤ E[‖x‖⁴] ≤ C₀E[‖x‖²] ≤ C₀²` with three standard errors of
/// slack per link.
pub fn moment_bound_verify(spec: &SamplerSpec, n_samples: usize) -> Result<MomentChain> {
    let report = moment_report(spec, n_samples)?;
    let probes = resolvable_probes(spec, 32, n_samples);
    let a3 = assumption3_constant(spec, 0.0, &probes, n_samples)?;
    let (m2, m4, c0) = (report.m2, report.m4, a3.sup.ratio);
    let mut check = BoundCheck::new(format!("moment_chain({})", spec.kind().name()));
    let k = 3.0;
    // E[‖x‖²]² ≤ E[‖x‖⁴]
    let se = (2.0 * m2.mean * m2.stderr).hypot(m4.stderr);
    check.record(m4.mean - m2.mean * m2.mean + k * se);
    // E[‖x‖⁴] ≤ C₀E[‖x‖²]
    let se = m4
        .stderr
        .hypot(c0.mean * m2.stderr)
        .hypot(m2.mean * c0.stderr);
    check.record(c0.mean * m2.mean - m4.mean + k * se);
    // C₀E[‖x‖²] ≤ C₀²
    let se = (c0.mean * m2.stderr).hypot((2.0 * c0.mean - m2.mean) * c0.stderr);
    check.record(c0.mean * (c0.mean - m2.mean) + k * se);
    Ok(MomentChain { m2, m4, c0, check })
}
