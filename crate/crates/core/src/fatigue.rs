//! Fatigue degradation of the fracture toughness.
//!
//! A loading-gated accumulation `θ̄` of the fatigue variable `ϑ = g(φ)(H + ψp)`
//! lowers the toughness through `f(θ̄)` once `θ̄` exceeds the threshold `ϑ_T`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FatigueKind {
    Asymptotic,
    Logarithmic,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatigueLaw {
    pub kind: FatigueKind,
    /// Slope κ of the logarithmic law.
    pub kappa: f64,
    /// Threshold ϑ_T [MPa].
    pub threshold: f64,
}

impl FatigueLaw {
    pub fn asymptotic(threshold: f64) -> Self {
        Self {
            kind: FatigueKind::Asymptotic,
            kappa: 0.0,
            threshold,
        }
    }

    pub fn logarithmic(threshold: f64, kappa: f64) -> Self {
        Self {
            kind: FatigueKind::Logarithmic,
            kappa,
            threshold,
        }
    }

    pub fn none() -> Self {
        Self {
            kind: FatigueKind::None,
            kappa: 0.0,
            threshold: f64::INFINITY,
        }
    }

    /// Accumulated value beyond which the logarithmic law vanishes.
    pub fn cutoff(&self) -> f64 {
        match self.kind {
            FatigueKind::Logarithmic => self.threshold * 10f64.powf(1.0 / self.kappa),
            _ => f64::INFINITY,
        }
    }

    /// Toughness multiplier `f(θ̄)`.
    pub fn degradation(&self, accumulated: f64) -> f64 {
        fatigue_degradation(accumulated, self)
    }
}

/// `f(θ̄)` for the given law; 1 up to the threshold, non-increasing after.
pub fn fatigue_degradation(accumulated: f64, law: &FatigueLaw) -> f64 {
    let t = law.threshold;
    if law.kind == FatigueKind::None || accumulated <= t {
        return 1.0;
    }
    match law.kind {
        FatigueKind::Asymptotic => {
            let r = 2.0 * t / (accumulated + t);
            r * r
        }
        FatigueKind::Logarithmic => {
            if accumulated >= law.cutoff() {
                0.0
            } else {
                let r = 1.0 - law.kappa * (accumulated / t).log10();
                (r * r).min(1.0)
            }
        }
        FatigueKind::None => 1.0,
    }
}

/// Fatigue variable `ϑ = g (H + ψp)`.
pub fn fatigue_variable(g: f64, history: f64, plastic_work: f64) -> f64 {
    g * (history + plastic_work)
}

/// Threshold `ϑ_T = G_c / (12 ℓ)`.
pub fn default_threshold(toughness: f64, length_scale: f64) -> f64 {
    toughness / (12.0 * length_scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FatigueState {
    /// ϑ at the last committed increment.
    pub last: f64,
    /// Accumulated history θ̄.
    pub accumulated: f64,
}

impl FatigueState {
    /// Adds the increase of ϑ when loading (ϑ grows and is positive).
    pub fn accumulate(self, next: f64) -> Self {
        let accumulated = if next > self.last && next > 0.0 {
            self.accumulated + (next - self.last)
        } else {
            self.accumulated
        };
        Self {
            last: next,
            accumulated,
        }
    }
}
