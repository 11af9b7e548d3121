//! Gamma variates with shape in `(0, 1]`.

use rand::Rng;

/// Draws from `Gamma(shape, 1)` for `0 < shape ≤ 1` using the Ahrens–Dieter
/// GS rejection algorithm. The proposal mixes `p^{1/a}` on `(0, 1]` with an
/// exponential tail on `(1, ∞)`; accepted values are exact draws.
pub fn gamma_small_shape<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    debug_assert!(shape > 0.0 && shape <= 1.0);
    let b = 1.0 + shape / std::f64::consts::E;
    loop {
        let p = b * rng.random::<f64>();
        let u: f64 = rng.random();
        if p <= 1.0 {
            let x = p.powf(1.0 / shape);
            if u <= (-x).exp() {
                return x;
            }
        } else {
            let x = -((b - p) / shape).ln();
            if u <= x.powf(shape - 1.0) {
                return x;
            }
        }
    }
}
