//! Piecewise-linear cyclic displacement program.

use serde::{Deserialize, Serialize};

/// Triangular displacement history. The first quarter cycle ramps from zero
/// to the maximum; afterwards the signal oscillates between the maximum and
/// `ratio × maximum` with unit period. Time is measured in cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProgram {
    /// Maximum of the signal [mm].
    pub amplitude: f64,
    /// Load ratio R = min / max.
    pub ratio: f64,
    pub increments_per_cycle: usize,
    pub cycles: usize,
}

impl LoadProgram {
    /// Checks the program; errors name the offending field.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(("amplitude", "must be >= 0".into()));
        }
        if !self.ratio.is_finite() || self.ratio > 1.0 {
            return Err(("ratio", "must be finite and <= 1".into()));
        }
        if self.increments_per_cycle < 4 || self.increments_per_cycle % 4 != 0 {
            return Err(("increments_per_cycle", "must be >= 4 and divisible by 4".into()));
        }
        if self.cycles == 0 {
            return Err(("cycles", "must be >= 1".into()));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        0.5 * (1.0 + self.ratio) * self.amplitude
    }

    pub fn half_range(&self) -> f64 {
        0.5 * (1.0 - self.ratio) * self.amplitude
    }

    pub fn n_increments(&self) -> usize {
        self.increments_per_cycle * self.cycles
    }

    pub fn time_of(&self, increment: usize) -> f64 {
        increment as f64 / self.increments_per_cycle as f64
    }

    pub fn end_time(&self) -> f64 {
        self.cycles as f64
    }

    /// Applied displacement at time `t`.
    pub fn signal(&self, t: f64) -> f64 {
        if t <= 0.25 {
            4.0 * t.max(0.0) * self.amplitude
        } else {
            self.mean() + self.half_range() * triangle(t)
        }
    }

    /// Whether the magnitude of the signal grows just before `t`.
    pub fn loading(&self, t: f64) -> bool {
        let dt = 1e-6;
        let (a, b) = (self.signal(t - dt), self.signal(t));
        b.abs() > a.abs()
    }
}

/// Unit triangular wave with zero at integers, +1 at t = 1/4 and −1 at 3/4.
pub fn triangle(t: f64) -> f64 {
    let p = t.rem_euclid(1.0);
    if p <= 0.25 {
        4.0 * p
    } else if p <= 0.75 {
        2.0 - 4.0 * p
    } else {
        4.0 * p - 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn program(ratio: f64) -> LoadProgram {
        LoadProgram {
            amplitude: 0.05,
            ratio,
            increments_per_cycle: 16,
            cycles: 3,
        }
    }

    #[test]
    fn symmetric_program_hits_its_extremes() {
        let p = program(-1.0);
        assert_eq!(p.signal(0.0), 0.0);
        assert_relative_eq!(p.signal(0.25), 0.05);
        assert_relative_eq!(p.signal(0.75), -0.05);
        assert_relative_eq!(p.signal(1.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(p.signal(2.25), 0.05, epsilon = 1e-15);
        assert!(p.loading(0.1) && !p.loading(0.4) && p.loading(0.6));
    }

    #[test]
    fn positive_ratio_oscillates_between_min_and_max() {
        let p = program(0.1);
        assert_relative_eq!(p.signal(0.25), 0.05);
        assert_relative_eq!(p.signal(0.75), 0.005, epsilon = 1e-15);
        assert_relative_eq!(p.signal(1.25), 0.05, epsilon = 1e-15);
        assert_relative_eq!(p.signal(0.5), 0.0275, epsilon = 1e-15);
    }

    #[test]
    fn validation() {
        assert!(program(-1.0).validate().is_ok());
        let mut p = program(-1.0);
        p.increments_per_cycle = 6;
        assert!(p.validate().is_err());
        p.increments_per_cycle = 16;
        p.amplitude = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn increments_align_with_quarter_cycles() {
        let p = program(-1.0);
        assert_eq!(p.n_increments(), 48);
        assert_eq!(p.time_of(4), 0.25);
        assert_eq!(p.time_of(48), 3.0);
    }
}
