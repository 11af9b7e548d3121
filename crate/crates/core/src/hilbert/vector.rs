use crate::{Error, Result};

/// Neumaier-compensated sum, accumulated strictly in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    let total = sum + carry;
    // inf - inf in the carry would otherwise turn an infinite sum into NaN
    if total.is_nan() && sum.is_infinite() {
        sum
    } else {
        total
    }
}

/// Coefficients of a vector in the eigenbasis of `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertVector(Vec<f64>);

impl HilbertVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("vector must have at least one coefficient"));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!(
                "coefficient {i} is not finite ({})",
                coeffs[i]
            )));
        }
        Ok(HilbertVector(coeffs))
    }

    pub fn zeros(d: usize) -> Self {
        HilbertVector(vec![0.0; d])
    }

    /// The basis vector `e_i` (0-based index).
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        HilbertVector(v)
    }

    /// `θ_i = i^{-s}` for `i = 1..=d`.
    pub fn power_law(d: usize, s: f64) -> Self {
        HilbertVector((1..=d).map(|i| (i as f64).powf(-s)).collect())
    }

    pub(crate) fn from_raw(coeffs: Vec<f64>) -> Self {
        HilbertVector(coeffs)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        compensated_sum(self.0.iter().map(|c| c * c))
    }

    /// Scaled copy with unit Euclidean norm; the zero vector is returned as is.
    pub fn normalized(&self) -> Self {
        let n = self.norm_sq().sqrt();
        if n == 0.0 {
            return self.clone();
        }
        HilbertVector(self.0.iter().map(|c| c / n).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl AsRef<[f64]> for HilbertVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
