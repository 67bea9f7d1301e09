//! Residual reports shared by every checker.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of sweeping a residual over a grid.
///
/// `worst_point` holds the `(x, λ, s)` triple where `max_abs` was attained;
/// checks without an `x` coordinate put their extra variable there
/// (for instance `λ̃` in the cocycle check).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub worst_point: [f64; 3],
    pub evaluated: usize,
    pub excluded: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    /// A report with no evaluated points that trivially passes.
    pub fn vacuous(tolerance: f64) -> Self {
        ResidualReport {
            max_abs: 0.0,
            mean_abs: 0.0,
            worst_point: [0.0; 3],
            evaluated: 0,
            excluded: 0,
            tolerance,
            pass: true,
        }
    }
}

/// `|diff| / (1 + |reference|)`
pub fn relative(diff: f64, reference: f64) -> f64 {
    diff.abs() / (1.0 + reference.abs())
}

/// Accumulates residuals into a [`ResidualReport`].
#[derive(Debug, Clone)]
pub struct ResidualSweep {
    check: String,
    tolerance: f64,
    sum: f64,
    max: f64,
    worst: [f64; 3],
    evaluated: usize,
    excluded: usize,
}

impl ResidualSweep {
    pub fn new(check: impl Into<String>, tolerance: f64) -> Self {
        ResidualSweep {
            check: check.into(),
            tolerance,
            sum: 0.0,
            max: 0.0,
            worst: [0.0; 3],
            evaluated: 0,
            excluded: 0,
        }
    }

    pub fn record(&mut self, residual: f64, point: [f64; 3]) {
        if residual.is_nan() {
            self.excluded += 1;
            return;
        }
        let r = residual.abs();
        self.evaluated += 1;
        self.sum += r;
        if r > self.max || self.evaluated == 1 {
            self.max = r;
            self.worst = point;
        }
    }

    pub fn exclude(&mut self) {
        self.excluded += 1;
    }

    /// Records the residual when the closure succeeds, else counts an exclusion.
    pub fn try_record(&mut self, point: [f64; 3], residual: impl FnOnce() -> Result<f64>) {
        match residual() {
            Ok(r) => self.record(r, point),
            Err(_) => self.exclude(),
        }
    }

    pub fn evaluated(&self) -> usize {
        self.evaluated
    }

    fn build(&self) -> ResidualReport {
        let mean = if self.evaluated > 0 {
            self.sum / self.evaluated as f64
        } else {
            0.0
        };
        ResidualReport {
            max_abs: self.max,
            mean_abs: mean.min(self.max),
            worst_point: self.worst,
            evaluated: self.evaluated,
            excluded: self.excluded,
            tolerance: self.tolerance,
            pass: self.evaluated > 0 && self.max <= self.tolerance,
        }
    }

    /// Finishes the sweep. Fails when nothing was evaluated or when more
    /// than half of the points had to be excluded.
    pub fn finish(self) -> Result<ResidualReport> {
        let total = self.evaluated + self.excluded;
        if self.evaluated == 0 {
            return Err(Error::EmptyGrid(format!(
                "{}: all {total} points excluded",
                self.check
            )));
        }
        if 2 * self.excluded > total {
            return Err(Error::Excluded {
                check: self.check,
                excluded: self.excluded,
                total,
            });
        }
        Ok(self.build())
    }

    /// Finishes the sweep, only failing when nothing was evaluated.
    pub fn finish_lenient(self) -> Result<ResidualReport> {
        if self.evaluated == 0 {
            return Err(Error::EmptyGrid(format!(
                "{}: all {} points excluded",
                self.check, self.excluded
            )));
        }
        Ok(self.build())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_invariants() {
        let mut sweep = ResidualSweep::new("t", 0.5);
        sweep.record(0.25, [1.0, 2.0, 3.0]);
        sweep.record(-0.75, [4.0, 5.0, 6.0]);
        sweep.exclude();
        let r = sweep.finish().unwrap();
        assert_eq!(r.max_abs, 0.75);
        assert_eq!(r.mean_abs, 0.5);
        assert_eq!(r.worst_point, [4.0, 5.0, 6.0]);
        assert_eq!((r.evaluated, r.excluded), (2, 1));
        assert!(!r.pass);
        assert!(r.max_abs >= r.mean_abs && r.mean_abs >= 0.0);
    }

    #[test]
    fn exclusion_policy() {
        let mut sweep = ResidualSweep::new("t", 1.0);
        sweep.exclude();
        assert!(matches!(sweep.clone().finish(), Err(Error::EmptyGrid(_))));
        sweep.record(0.0, [0.0; 3]);
        sweep.exclude();
        assert!(matches!(sweep.clone().finish(), Err(Error::Excluded { .. })));
        assert!(sweep.finish_lenient().unwrap().pass);
    }
}
