//! Monte Carlo estimates with standard errors.

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            mean: value,
            stderr: 0.0,
            count: 1,
        }
    }

    /// `|mean − target|` in units of standard error. An exact match has score 0
    /// even when `stderr == 0`.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Estimate {
            mean: self.mean * factor,
            stderr: self.stderr * factor.abs(),
            count: self.count,
        }
    }
}

/// Welford running mean and variance. Results depend on push order, which
/// callers keep fixed.
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two values.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        let stderr = if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        };
        Estimate {
            mean: self.mean,
            stderr,
            count: self.count,
        }
    }
}

impl FromIterator<f64> for Accumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Accumulator::new();
        for v in iter {
            acc.push(v);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let acc: Accumulator = [1.0, 2.0, 3.0, 4.0].into_iter().collect();
        let e = acc.estimate();
        assert_eq!(e.mean, 2.5);
        assert!((acc.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert!((e.stderr - (5.0 / 12.0_f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_value_has_zero_stderr() {
        let acc: Accumulator = [7.0].into_iter().collect();
        assert_eq!(acc.estimate().stderr, 0.0);
        assert_eq!(acc.estimate().z_score(7.0), 0.0);
    }
}
