//! Step-size control with cut-backs after failed increments.

use thiserror::Error;

/// Consecutive halvings allowed before the run is aborted.
pub const MAX_CUTBACKS: usize = 8;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("increment failed after {MAX_CUTBACKS} cut-backs (last step {step:.3e})")]
pub struct CutbackLimit {
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveStepper {
    pub nominal: f64,
    pub current: f64,
    pub consecutive_failures: usize,
    pub total_cutbacks: usize,
}

impl AdaptiveStepper {
    pub fn new(nominal: f64) -> Self {
        Self {
            nominal,
            current: nominal,
            consecutive_failures: 0,
            total_cutbacks: 0,
        }
    }

    /// Step to attempt when `remaining` is left until the next target time.
    pub fn next_step(&self, remaining: f64) -> f64 {
        // avoid leaving a sliver behind the target
        if self.current >= remaining * (1.0 - 1e-9) {
            remaining
        } else {
            self.current
        }
    }

    /// Halves the step; errors on the ninth consecutive failure.
    pub fn on_failure(&mut self) -> Result<(), CutbackLimit> {
        self.consecutive_failures += 1;
        if self.consecutive_failures > MAX_CUTBACKS {
            return Err(CutbackLimit { step: self.current });
        }
        self.current *= 0.5;
        self.total_cutbacks += 1;
        Ok(())
    }

    /// Grows the step back toward the nominal size.
    pub fn on_success(&mut self) {
        self.consecutive_failures = 0;
        self.current = (2.0 * self.current).min(self.nominal);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_step_is_kept_on_success() {
        let mut s = AdaptiveStepper::new(0.25);
        s.on_success();
        assert_eq!(s.next_step(0.25), 0.25);
    }

    #[test]
    fn one_failure_then_success() {
        let mut s = AdaptiveStepper::new(0.25);
        let mut tried = vec![s.next_step(0.25)];
        s.on_failure().unwrap();
        tried.push(s.next_step(0.25));
        s.on_success();
        assert_eq!(tried, vec![0.25, 0.125]);
        assert_eq!(s.current, 0.25);
    }

    #[test]
    fn ninth_failure_aborts() {
        let mut s = AdaptiveStepper::new(1.0);
        for _ in 0..MAX_CUTBACKS {
            s.on_failure().unwrap();
        }
        assert_eq!(s.current, 1.0 / 256.0);
        assert!(s.on_failure().is_err());
    }
}
