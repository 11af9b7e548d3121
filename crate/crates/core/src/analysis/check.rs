/// Outcome of checking an inequality `value ≤ bound` over a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub grid_points: usize,
    pub violations: usize,
    /// Smallest observed `bound − value` (negative when violated).
    pub worst_margin: f64,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>) -> Self {
        BoundCheck {
            name: name.into(),
            grid_points: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
        }
    }

    /// Records one grid point with signed margin `bound − value`. A NaN
    /// margin counts as a violation.
    pub fn record(&mut self, margin: f64) {
        self.grid_points += 1;
        if !(margin >= 0.0) {
            self.violations += 1;
        }
        if margin.is_nan() {
            self.worst_margin = f64::NAN;
        } else if !self.worst_margin.is_nan() {
            self.worst_margin = self.worst_margin.min(margin);
        }
    }

    /// Records `value ≤ bound · (1 + rel_slack)` with margin measured
    /// relative to the bound.
    pub fn record_relative(&mut self, bound: f64, value: f64, rel_slack: f64) {
        let margin = if bound == value {
            0.0
        } else {
            (bound * (1.0 + rel_slack) - value) / bound.abs().max(f64::MIN_POSITIVE)
        };
        self.record(margin);
    }

    pub fn merge(&mut self, other: &BoundCheck) {
        self.grid_points += other.grid_points;
        self.violations += other.violations;
        if other.worst_margin.is_nan() {
            self.worst_margin = f64::NAN;
        } else if !self.worst_margin.is_nan() {
            self.worst_margin = self.worst_margin.min(other.worst_margin);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.grid_points > 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_violations() {
        let mut c = BoundCheck::new("t");
        c.record(1.0);
        c.record(0.0);
        assert!(c.passed());
        c.record(-0.5);
        c.record(f64::NAN);
        assert_eq!(c.violations, 2);
        assert!(c.worst_margin.is_nan());
        assert!(!c.passed());
    }

    #[test]
    fn empty_check_does_not_pass() {
        assert!(!BoundCheck::new("empty").passed());
    }

    #[test]
    fn relative_slack() {
        let mut c = BoundCheck::new("t");
        c.record_relative(1.0, 1.0 + 1e-13, 1e-12);
        assert!(c.passed());
        c.record_relative(1.0, 1.0 + 1e-11, 1e-12);
        assert!(!c.passed());
    }
}
