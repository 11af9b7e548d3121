use crate::hilbert::{compensated_sum, HilbertVector, Spectrum};
use crate::{Error, Result};

fn check_step(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::invalid(format!("mean dynamics need a finite γ >= 0, got {gamma}")));
    }
    Ok(())
}

/// `ln|1 − γλ|`, accurate when `γλ` is small.
fn log_factor(gamma: f64, lambda: f64) -> f64 {
    let g = gamma * lambda;
    if g < 1.0 {
        (-g).ln_1p()
    } else {
        (g - 1.0).ln()
    }
}

/// `n · ln|1 − γλ|` with the convention `0 · ln 0 = 0`.
fn scaled_log_factor(n: f64, gamma: f64, lambda: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        n * log_factor(gamma, lambda)
    }
}

/// `T^n θ0 = Σ (1 − γλ_i)^n θ0_i e_i`, evaluated as `±exp(n·ln|1 − γλ_i|)`.
/// Any `γ ≥ 0` is accepted; factors with `γλ_i > 2` grow.
pub fn mean_iterate(theta0: &HilbertVector, spec: &Spectrum, gamma: f64, n: usize) -> Result<HilbertVector> {
    Error::check_dim(spec.dim(), theta0.dim())?;
    check_step(gamma)?;
    let nf = n as f64;
    Ok(HilbertVector::from_raw(
        theta0
            .coeffs()
            .iter()
            .zip(spec.eigenvalues())
            .map(|(t, &l)| {
                let sign = if gamma * l > 1.0 && n % 2 == 1 { -1.0 } else { 1.0 };
                sign * t * scaled_log_factor(nf, gamma, l).exp()
            })
            .collect(),
    ))
}

/// `‖T^n θ0‖_κ² = Σ λ_i^{-κ} (1 − γλ_i)^{2n} θ0_i²`, each term in log space.
pub fn mean_iterate_phi(theta0: &HilbertVector, spec: &Spectrum, gamma: f64, n: usize, kappa: f64) -> Result<f64> {
    Error::check_dim(spec.dim(), theta0.dim())?;
    check_step(gamma)?;
    let two_n = 2.0 * n as f64;
    Ok(compensated_sum(
        theta0
            .coeffs()
            .iter()
            .zip(spec.eigenvalues())
            .map(|(&t, &l)| {
                if t == 0.0 {
                    0.0
                } else {
                    (scaled_log_factor(two_n, gamma, l) - kappa * l.ln() + 2.0 * t.abs().ln()).exp()
                }
            }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{make_spectrum, phi_norm, SpectrumFamily};
    use approx::assert_relative_eq;

    fn three() -> Spectrum {
        make_spectrum(SpectrumFamily::Explicit { values: vec![0.4, 0.2, 0.1] }, 3).unwrap()
    }

    #[test]
    fn zero_steps_is_identity() {
        let t = HilbertVector::power_law(3, 1.0);
        assert_eq!(mean_iterate(&t, &three(), 0.7, 0).unwrap(), t);
    }

    #[test]
    fn one_step_is_t_applied_once() {
        let t = HilbertVector::new(vec![1.0, -2.0, 0.5]).unwrap();
        let got = mean_iterate(&t, &three(), 0.7, 1).unwrap();
        for ((g, t), l) in got.coeffs().iter().zip(t.coeffs()).zip([0.4, 0.2, 0.1]) {
            assert_relative_eq!(*g, (1.0 - 0.7 * l) * t, max_relative = 1e-15);
        }
    }

    #[test]
    fn two_steps_example() {
        let t = HilbertVector::new(vec![1.0; 3]).unwrap();
        let got = mean_iterate(&t, &three(), 1.0, 2).unwrap();
        for (g, w) in got.coeffs().iter().zip([0.36, 0.64, 0.81]) {
            assert_relative_eq!(*g, w, max_relative = 1e-15);
        }
    }

    #[test]
    fn phi_shortcut_matches_vector_route() {
        let spec = make_spectrum(SpectrumFamily::PowerLaw { c: 0.4, p: 2.0 }, 300).unwrap();
        let t = HilbertVector::power_law(300, 2.0);
        for n in [0, 1, 17, 1000] {
            for kappa in [0.0, 0.5, 1.3] {
                let v = mean_iterate(&t, &spec, 1.0, n).unwrap();
                let a = phi_norm(&v, &spec, kappa).unwrap();
                let b = mean_iterate_phi(&t, &spec, 1.0, n, kappa).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn large_steps_overshoot() {
        let t = HilbertVector::power_law(3, 1.0);
        // γ = 5: factors 1 − 2 = −1, 1 − 1 = 0, 1 − 0.5 = 0.5
        let m = mean_iterate(&t, &three(), 5.0, 3).unwrap();
        assert_eq!(&m.coeffs()[..2], &[-1.0, 0.0]);
        assert_relative_eq!(m.coeffs()[2], 0.125 / 3.0, max_relative = 1e-14);
        assert_eq!(mean_iterate(&t, &three(), 5.0, 0).unwrap().coeffs(), t.coeffs());
        let phi = mean_iterate_phi(&t, &three(), 5.0, 3, 0.0).unwrap();
        assert_relative_eq!(phi, 1.0 + (0.125f64 / 3.0).powi(2), max_relative = 1e-14);
        assert_eq!(mean_iterate_phi(&t, &three(), 5.0, 0, 0.0).unwrap(), t.norm_sq());
    }

    #[test]
    fn rejects_negative_step() {
        let t = HilbertVector::power_law(3, 1.0);
        assert!(mean_iterate(&t, &three(), -0.1, 3).is_err());
        assert!(mean_iterate_phi(&t, &three(), f64::NAN, 3, 0.0).is_err());
    }
}
