//! The Gamma function on the positive reals.

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for `z > 0` (Lanczos, `g = 7`, nine terms). Arguments below
/// `1/2` are shifted up with `Γ(z) = Γ(z+1)/z`.
pub fn ln_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Γ(z) requires finite z > 0, got {z}")));
    }
    if z < 0.5 {
        return Ok(ln_gamma(z + 1.0)? - z.ln());
    }
    let z = z - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln())
}

/// `Γ(z) = ∫₀^∞ e^{-t} t^{z-1} dt` for `z > 0`.
pub fn gamma_function(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Γ(z) requires finite z > 0, got {z}")));
    }
    if z < 0.5 {
        return Ok(gamma_function(z + 1.0)? / z);
    }
    let z1 = z - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = z1 + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z1 + i as f64);
    }
    // split t^{z-1/2} to stay finite up to z ≈ 171
    let half = t.powf(0.5 * (z1 + 0.5));
    Ok((2.0 * std::f64::consts::PI).sqrt() * half * (-t).exp() * half * a)
}
