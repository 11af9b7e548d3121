use super::{compensated_sum, HilbertVector, Spectrum};
use crate::{Error, Result};

/// `⟨a, b⟩` with compensated accumulation in index order.
pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Precomputed `λ_i^κ` for one exponent, reused across many evaluations of
/// `⟨θ, S^κ θ⟩`.
#[derive(Debug, Clone)]
pub struct PowerWeights {
    exponent: f64,
    weights: Vec<f64>,
    log_lambda: Vec<f64>,
}

impl PowerWeights {
    pub fn new(spec: &Spectrum, exponent: f64) -> Self {
        let log_lambda: Vec<f64> = spec.eigenvalues().iter().map(|l| l.ln()).collect();
        let weights = spec
            .eigenvalues()
            .iter()
            .map(|l| l.powf(exponent))
            .collect();
        PowerWeights {
            exponent,
            weights,
            log_lambda,
        }
    }

    /// Weights for `φ_β`, i.e. `λ_i^{-β}`.
    pub fn phi(spec: &Spectrum, beta: f64) -> Self {
        Self::new(spec, -beta)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `Σ λ_i^κ θ_i²`. Terms whose direct evaluation would overflow or lose
    /// precision to underflow are evaluated in log space; a sum that exceeds
    /// the floating-point range is `+∞`.
    pub fn quadratic(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.weights.len());
        compensated_sum(theta.iter().enumerate().map(|(i, &t)| self.term(i, t)))
    }

    #[inline]
    fn term(&self, i: usize, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let sq = t * t;
        let w = self.weights[i];
        if w.is_finite() && w != 0.0 && sq.is_normal() {
            w * sq
        } else {
            (2.0 * t.abs().ln() + self.exponent * self.log_lambda[i]).exp()
        }
    }
}

/// `φ_β(θ) = ⟨θ, S^{-β} θ⟩ = Σ λ_i^{-β} θ_i²`.
pub fn phi_norm(theta: &HilbertVector, spec: &Spectrum, beta: f64) -> Result<f64> {
    Error::check_dim(spec.dim(), theta.dim())?;
    Ok(PowerWeights::phi(spec, beta).quadratic(theta.coeffs()))
}

/// `S^κ θ`, coefficient-wise `λ_i^κ θ_i`.
pub fn apply_s_pow(theta: &HilbertVector, spec: &Spectrum, kappa: f64) -> Result<HilbertVector> {
    Error::check_dim(spec.dim(), theta.dim())?;
    let out: Vec<f64> = theta
        .coeffs()
        .iter()
        .zip(spec.eigenvalues())
        .map(|(&t, &l)| {
            let w = l.powf(kappa);
            let direct = w * t;
            if t == 0.0 || (w.is_finite() && w != 0.0 && direct.is_normal()) {
                direct
            } else {
                t.signum() * (t.abs().ln() + kappa * l.ln()).exp()
            }
        })
        .collect();
    if let Some(i) = out.iter().position(|c| !c.is_finite()) {
        return Err(Error::Domain(format!(
            "S^{kappa} overflows at coefficient {i}"
        )));
    }
    Ok(HilbertVector::from_raw(out))
}

/// `S_x θ = ⟨θ, x⟩ x`.
pub fn apply_s_x(theta: &HilbertVector, x: &HilbertVector) -> Result<HilbertVector> {
    Error::check_dim(theta.dim(), x.dim())?;
    let p = inner(theta.coeffs(), x.coeffs());
    Ok(HilbertVector::from_raw(
        x.coeffs().iter().map(|xi| p * xi).collect(),
    ))
}

/// `T_x θ = θ − γ ⟨θ, x⟩ x`.
pub fn apply_t_x(theta: &HilbertVector, x: &HilbertVector, gamma: f64) -> Result<HilbertVector> {
    Error::check_dim(theta.dim(), x.dim())?;
    if !(gamma >= 0.0) {
        return Err(Error::invalid(format!("step size must satisfy γ >= 0, got {gamma}")));
    }
    let mut out = theta.coeffs().to_vec();
    t_x_in_place(&mut out, x.coeffs(), gamma);
    Ok(HilbertVector::from_raw(out))
}

/// In-place `θ ← θ − γ⟨θ, x⟩x`; returns the projection `⟨θ, x⟩` taken
/// before the update.
#[inline]
pub fn t_x_in_place(theta: &mut [f64], x: &[f64], gamma: f64) -> f64 {
    let p = inner(theta, x);
    let g = gamma * p;
    if g != 0.0 {
        for (t, xi) in theta.iter_mut().zip(x) {
            *t -= g * xi;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{make_spectrum, SpectrumFamily};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn power_spec(d: usize) -> Spectrum {
        make_spectrum(SpectrumFamily::PowerLaw { c: 0.4, p: 2.0 }, d).unwrap()
    }

    #[test]
    fn phi_of_basis_vector() {
        let s = power_spec(10);
        for beta in [-1.0, 0.0, 0.7, 3.0] {
            let v = phi_norm(&HilbertVector::basis(10, 0), &s, beta).unwrap();
            assert_relative_eq!(v, 0.4_f64.powf(-beta), max_relative = 1e-15);
        }
    }

    #[test]
    fn phi_zero_is_squared_norm() {
        let s = power_spec(50);
        let t = HilbertVector::power_law(50, 0.8);
        assert_eq!(phi_norm(&t, &s, 0.0).unwrap(), t.norm_sq());
    }

    #[test]
    fn phi_matches_brute_force_sum() {
        let s = power_spec(1000);
        let t = HilbertVector::power_law(1000, 2.0);
        // i^{-4} / (0.4 i^{-2}) = i^{-2} / 0.4, summed from the small end
        let mut oracle = 0.0;
        for i in (1..=1000).rev() {
            let i = i as f64;
            oracle += 1.0 / (i * i) / 0.4;
        }
        let got = phi_norm(&t, &s, 1.0).unwrap();
        assert_relative_eq!(got, oracle, max_relative = 1e-13);
    }

    #[test]
    fn phi_overflow_is_infinite_not_error() {
        let s = power_spec(1000);
        let t = HilbertVector::power_law(1000, 0.0);
        let v = phi_norm(&t, &s, 120.0).unwrap();
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn phi_tiny_coefficients_use_log_space() {
        let s = power_spec(3);
        let t = HilbertVector::new(vec![0.0, 0.0, 1e-200]).unwrap();
        // θ² underflows on its own but λ^{-β} θ² is a normal number
        let v = phi_norm(&t, &s, 100.0).unwrap();
        let want = (2.0 * (1e-200_f64).ln() - 100.0 * (0.4_f64 / 9.0).ln()).exp();
        assert_relative_eq!(v, want, max_relative = 1e-12);
        assert!(v > 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let s = power_spec(3);
        assert!(matches!(
            phi_norm(&HilbertVector::zeros(4), &s, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(apply_s_pow(&HilbertVector::zeros(2), &s, 1.0).is_err());
        assert!(apply_t_x(&HilbertVector::zeros(2), &HilbertVector::zeros(3), 1.0).is_err());
    }

    #[test]
    fn s_pow_examples() {
        let s = power_spec(5);
        let t = HilbertVector::power_law(5, 1.3);
        assert_eq!(apply_s_pow(&t, &s, 0.0).unwrap(), t);
        let e2 = apply_s_pow(&HilbertVector::basis(5, 1), &s, 1.0).unwrap();
        assert_eq!(e2.coeffs(), &[0.0, 0.1, 0.0, 0.0, 0.0]);
        let back = apply_s_pow(&apply_s_pow(&t, &s, -1.0).unwrap(), &s, 1.0).unwrap();
        for (a, b) in back.coeffs().iter().zip(t.coeffs()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }

    #[test]
    fn t_x_examples() {
        let t = HilbertVector::new(vec![0.3, -1.0, 2.0]).unwrap();
        let x = HilbertVector::new(vec![1.0, 0.5, 0.1]).unwrap();
        assert_eq!(apply_t_x(&t, &x, 0.0).unwrap(), t);

        let orth = HilbertVector::new(vec![1.0, 2.0, 0.0]).unwrap();
        let x2 = HilbertVector::new(vec![2.0, -1.0, 0.0]).unwrap();
        assert_eq!(apply_t_x(&orth, &x2, 0.7).unwrap(), orth);

        let u = HilbertVector::new(vec![0.6, 0.0, 0.8]).unwrap();
        let z = apply_t_x(&u, &u, 1.0).unwrap();
        assert!(z.coeffs().iter().all(|c| c.abs() < 1e-16));

        assert!(apply_t_x(&t, &x, -0.1).is_err());
    }

    fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0..10.0_f64, d)
    }

    proptest! {
        #[test]
        fn s_x_is_symmetric(eta in vec_strategy(12), theta in vec_strategy(12), x in vec_strategy(12)) {
            let (e, t, x) = (
                HilbertVector::new(eta).unwrap(),
                HilbertVector::new(theta).unwrap(),
                HilbertVector::new(x).unwrap(),
            );
            let a = inner(e.coeffs(), apply_s_x(&t, &x).unwrap().coeffs());
            let b = inner(t.coeffs(), apply_s_x(&e, &x).unwrap().coeffs());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
        }

        #[test]
        fn s_x_is_non_negative(theta in vec_strategy(12), x in vec_strategy(12)) {
            let (t, x) = (HilbertVector::new(theta).unwrap(), HilbertVector::new(x).unwrap());
            let q = inner(t.coeffs(), apply_s_x(&t, &x).unwrap().coeffs());
            let p = inner(t.coeffs(), x.coeffs());
            prop_assert!(q >= 0.0);
            prop_assert!((q - p * p).abs() <= 1e-12 * q.max(1e-300));
        }

        #[test]
        fn powers_compose(theta in vec_strategy(30), k1 in -2.0..2.0_f64, k2 in -2.0..2.0_f64) {
            let s = power_spec(30);
            let t = HilbertVector::new(theta).unwrap();
            let two = apply_s_pow(&apply_s_pow(&t, &s, k1).unwrap(), &s, k2).unwrap();
            let one = apply_s_pow(&t, &s, k1 + k2).unwrap();
            for (a, b) in two.coeffs().iter().zip(one.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300));
            }
        }

        #[test]
        fn phi_is_monotone_in_beta(theta in vec_strategy(30), b in -2.0..3.0_f64, db in 0.0..2.0_f64) {
            let s = power_spec(30);
            let t = HilbertVector::new(theta).unwrap();
            let lo = phi_norm(&t, &s, b).unwrap();
            let hi = phi_norm(&t, &s, b + db).unwrap();
            prop_assert!(hi >= lo * (1.0 - 1e-14));
        }

        #[test]
        fn holder_interpolation(theta in vec_strategy(30), beta in -1.0..1.0_f64, gap1 in 0.01..1.5_f64, gap2 in 0.01..1.5_f64) {
            let s = power_spec(30);
            let t = HilbertVector::new(theta).unwrap();
            let kappa = beta + gap1;
            let alpha = kappa + gap2;
            let p = (alpha - kappa) / (alpha - beta);
            let lhs = phi_norm(&t, &s, kappa).unwrap();
            let rhs = phi_norm(&t, &s, beta).unwrap().powf(p) * phi_norm(&t, &s, alpha).unwrap().powf(1.0 - p);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
