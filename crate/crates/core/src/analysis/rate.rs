use crate::{Error, Result};

/// Slope of `ln value` against `ln n` by ordinary least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub exponent: f64,
    pub stderr: f64,
    /// `exp(intercept)`, the fitted prefactor.
    pub prefactor: f64,
    pub window: (f64, f64),
    pub points_used: usize,
}

/// Fits `value ≈ C n^{exponent}` to the points with `n` in `window`
/// (inclusive). Needs at least three points, all with positive values.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateEstimate> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::invalid(format!(
            "rate window must satisfy 0 < n_min < n_max, got ({lo}, {hi})"
        )));
    }
    let mut pts = Vec::new();
    for &(n, v) in series.iter().filter(|(n, _)| *n >= lo && *n <= hi) {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "value {v} at n = {n} is not positive; cannot take logs"
            )));
        }
        pts.push((n.ln(), v.ln()));
    }
    let k = pts.len();
    if k < 3 {
        return Err(Error::InsufficientData(format!(
            "{k} points in window ({lo}, {hi}); need at least 3"
        )));
    }
    // shift by the first point so a constant series fits a slope of exactly 0
    let (x0, y0) = pts[0];
    for p in &mut pts {
        *p = (p.0 - x0, p.1 - y0);
    }
    let kf = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points share the same n".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(RateEstimate {
        exponent: slope,
        stderr: (ssr / (kf - 2.0) / sxx).sqrt(),
        prefactor: (intercept + y0 - slope * x0).exp(),
        window,
        points_used: k,
    })
}
