//! Backtracking line search on the residual norm.

/// Sufficient-decrease parameter of the acceptance test.
pub const SUFFICIENT_DECREASE: f64 = 1e-4;
/// Smallest step tried; accepted unconditionally.
pub const ALPHA_MIN: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    pub merit: f64,
    pub evaluations: usize,
    /// The minimum step was accepted without sufficient decrease.
    pub warned: bool,
}

/// Halves the step from `α = 1` until `m(α) ≤ (1 − 10⁻⁴α) m(0)`, accepting
/// `α = 1/64` otherwise. With `enabled == false` the full step is taken.
/// The last call of `merit_at` is always at the returned step.
pub fn backtracking<E>(
    merit0: f64,
    enabled: bool,
    mut merit_at: impl FnMut(f64) -> Result<f64, E>,
) -> Result<LineSearchOutcome, E> {
    let mut alpha = 1.0;
    let mut evaluations = 0;
    loop {
        let m = merit_at(alpha)?;
        evaluations += 1;
        if !enabled || m <= (1.0 - SUFFICIENT_DECREASE * alpha) * merit0 {
            return Ok(LineSearchOutcome {
                alpha,
                merit: m,
                evaluations,
                warned: false,
            });
        }
        if alpha <= ALPHA_MIN {
            log::warn!("line search accepted the minimum step {alpha} without sufficient decrease ({m:.3e} vs {merit0:.3e})");
            return Ok(LineSearchOutcome {
                alpha,
                merit: m,
                evaluations,
                warned: true,
            });
        }
        alpha *= 0.5;
    }
}
