use super::super::rng::purpose;
use crate::hilbert::{compensated_sum, inner, phi_norm, HilbertVector, PowerWeights};
use crate::sampler::SamplerSpec;
use crate::stats::{Accumulator, Estimate};
use crate::{Error, Result};

/// Both sides of `E[φ_β(T_x θ)] = φ_β(θ) − 2γ φ_{β-1}(θ) + γ² E[⟨θ,x⟩² φ_β(x)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionCheck {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// `E[⟨θ,x⟩² φ_β(x)]`
    pub third_term: Estimate,
    /// `|lhs − rhs|` over the combined standard error (0 when both agree exactly).
    pub discrepancy_se: f64,
    /// Relative discrepancy `|lhs − rhs| / |rhs|`.
    pub relative_gap: f64,
    /// Both sides were enumerated over a finite support rather than sampled.
    pub exact: bool,
}

/// Evaluates both sides of the one-step recursion. The coordinate-bounded
/// sampler is enumerated exactly; otherwise the left side and the third
/// term on the right are estimated from two independent streams.
pub fn recursion_check(
    theta: &HilbertVector,
    spec: &SamplerSpec,
    gamma: f64,
    beta: f64,
    n_samples: usize,
) -> Result<RecursionCheck> {
    Error::check_dim(spec.dim(), theta.dim())?;
    if !(gamma >= 0.0) {
        return Err(Error::invalid(format!("step size must satisfy γ >= 0, got {gamma}")));
    }
    let phi_b = phi_norm(theta, spec.spectrum(), beta)?;
    let phi_b1 = phi_norm(theta, spec.spectrum(), beta - 1.0)?;
    if !phi_b.is_finite() || !phi_b1.is_finite() {
        return Err(Error::Domain("φ_β(θ) and φ_{β-1}(θ) must be finite".into()));
    }
    let weights = PowerWeights::phi(spec.spectrum(), beta);
    let t = theta.coeffs();
    let mut buf = vec![0.0; spec.dim()];

    let (lhs, third, exact) = if let Some(atoms) = spec.atoms() {
        let mut lhs_terms = Vec::with_capacity(atoms.len());
        let mut third_terms = Vec::with_capacity(atoms.len());
        for &(p, i, v) in &atoms {
            // T_a θ only changes coordinate i
            buf.copy_from_slice(t);
            let proj = t[i] * v;
            buf[i] -= gamma * proj * v;
            lhs_terms.push(p * weights.quadratic(&buf));
            third_terms.push(p * proj * proj * v * v * weights.weights()[i]);
        }
        (
            Estimate::exact(compensated_sum(lhs_terms)),
            Estimate::exact(compensated_sum(third_terms)),
            true,
        )
    } else {
        if n_samples < 2 {
            return Err(Error::invalid("recursion_check needs at least 2 samples"));
        }
        let mut x = vec![0.0; spec.dim()];
        let mut lhs = Accumulator::new();
        let mut rng = spec.aux_stream(purpose::RECURSION_LHS);
        for _ in 0..n_samples {
            spec.sample_into(&mut rng, &mut x);
            let proj = inner(t, &x);
            for ((b, ti), xi) in buf.iter_mut().zip(t).zip(&x) {
                *b = ti - gamma * proj * xi;
            }
            lhs.push(weights.quadratic(&buf));
        }
        let mut third = Accumulator::new();
        let mut rng = spec.aux_stream(purpose::RECURSION_RHS);
        for _ in 0..n_samples {
            spec.sample_into(&mut rng, &mut x);
            let proj = inner(t, &x);
            third.push(proj * proj * weights.quadratic(&x));
        }
        (lhs.estimate(), third.estimate(), false)
    };

    let rhs = Estimate {
        mean: phi_b - 2.0 * gamma * phi_b1 + gamma * gamma * third.mean,
        stderr: gamma * gamma * third.stderr,
        count: third.count,
    };
    let gap = (lhs.mean - rhs.mean).abs();
    let combined = lhs.stderr.hypot(rhs.stderr);
    Ok(RecursionCheck {
        lhs,
        rhs,
        third_term: third,
        discrepancy_se: if gap == 0.0 { 0.0 } else { gap / combined },
        relative_gap: if gap == 0.0 { 0.0 } else { gap / rhs.mean.abs() },
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{apply_t_x, make_spectrum, Spectrum, SpectrumFamily};
    use crate::sampler::{assumption3_lhs, SamplerKind};

    fn spectrum(d: usize) -> Spectrum {
        make_spectrum(SpectrumFamily::PowerLaw { c: 0.4, p: 2.0 }, d).unwrap()
    }

    #[test]
    fn zero_step_is_exact() {
        let s = SamplerSpec::new(SamplerKind::Gff, spectrum(10), 1);
        let t = HilbertVector::power_law(10, 1.5);
        let r = recursion_check(&t, &s, 0.0, 0.7, 500).unwrap();
        let phi = phi_norm(&t, s.spectrum(), 0.7).unwrap();
        assert_eq!(r.lhs.mean, phi);
        assert_eq!(r.rhs.mean, phi);
        assert_eq!(r.discrepancy_se, 0.0);
    }

    #[test]
    fn coordinate_bounded_enumeration() {
        let d = 25;
        let s = SamplerSpec::new(SamplerKind::CoordinateBounded, spectrum(d), 1);
        let t = HilbertVector::power_law(d, 1.2).normalized();
        for beta in [-0.5, 0.0, 0.4, 1.0] {
            let r = recursion_check(&t, &s, 0.9 / s.second_moment(), beta, 0).unwrap();
            assert!(r.exact);
            assert!(r.relative_gap <= 1e-10, "β = {beta}: {r:?}");

            // independent route: apply T_a for every atom through the public operator
            let mut lhs = 0.0;
            for (p, i, v) in s.atoms().unwrap() {
                let mut a = vec![0.0; d];
                a[i] = v;
                let a = HilbertVector::new(a).unwrap();
                let moved = apply_t_x(&t, &a, 0.9 / s.second_moment()).unwrap();
                lhs += p * phi_norm(&moved, s.spectrum(), beta).unwrap();
            }
            assert!((lhs - r.lhs.mean).abs() <= 1e-12 * lhs);
            let third = assumption3_lhs(&s, &t, beta).unwrap();
            assert!((third - r.third_term.mean).abs() <= 1e-12 * third);
        }
    }

    #[test]
    fn gamma_sym_agrees_within_se() {
        let d = 40;
        let s = SamplerSpec::new(SamplerKind::GammaSym, spectrum(d), 4);
        let t = HilbertVector::power_law(d, 2.0).normalized();
        let r = recursion_check(&t, &s, 0.8, 0.3, 50_000).unwrap();
        assert!(r.discrepancy_se <= 3.0, "{r:?}");
        let third = assumption3_lhs(&s, &t, 0.3).unwrap();
        assert!(r.third_term.agrees_with(third, 4.0));
    }
}
