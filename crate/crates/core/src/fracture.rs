//! Phase-field fracture constitutive functions: degradation `g(φ)`, crack
//! geometric function `w(φ)`, damage thresholds and the history field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default residual stiffness κ used in the momentum balance.
pub const DEFAULT_RESIDUAL_STIFFNESS: f64 = 1e-7;

const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FractureError {
    #[error("invalid fracture parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("phase field value {0} outside [0, 1]")]
    PhaseOutOfBounds(f64),
    #[error("the strength is an input of the PF-CZM model and cannot be estimated")]
    StrengthIsInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FractureKind {
    At1,
    At2,
    PfCzm,
}

/// Value and first two derivatives of a scalar function of φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractureModel {
    pub kind: FractureKind,
    /// Toughness G_c [N/mm], numerically equal to kJ/m².
    pub toughness: f64,
    /// Length scale ℓ [mm].
    pub length_scale: f64,
    /// Strength σ_c [MPa]; derived for AT1/AT2.
    pub strength: f64,
    /// Young's modulus [MPa], needed by the PF-CZM constants.
    pub young: f64,
    pub residual_stiffness: f64,
}

impl FractureModel {
    /// Builds a model. `strength` must be given for PF-CZM and omitted otherwise.
    pub fn new(
        kind: FractureKind,
        toughness: f64,
        length_scale: f64,
        young: f64,
        strength: Option<f64>,
    ) -> Result<Self, FractureError> {
        let bad = |name, reason: &str| FractureError::InvalidParameter {
            name,
            reason: reason.to_string(),
        };
        if !(toughness > 0.0) {
            return Err(bad("toughness", "must be > 0"));
        }
        if !(length_scale > 0.0) {
            return Err(bad("length_scale", "must be > 0"));
        }
        if !(young > 0.0) {
            return Err(bad("young", "must be > 0"));
        }
        let strength = match (kind, strength) {
            (FractureKind::PfCzm, Some(s)) if s > 0.0 => s,
            (FractureKind::PfCzm, Some(_)) => return Err(bad("strength", "must be > 0")),
            (FractureKind::PfCzm, None) => return Err(bad("strength", "required by the PF-CZM model")),
            (_, Some(_)) => {
                return Err(bad("strength", "only the PF-CZM model takes the strength as input"))
            }
            (k, None) => strength_estimate(k, young, toughness, length_scale)?,
        };
        Ok(Self {
            kind,
            toughness,
            length_scale,
            strength,
            young,
            residual_stiffness: DEFAULT_RESIDUAL_STIFFNESS,
        })
    }

    pub fn with_residual_stiffness(mut self, kappa: f64) -> Self {
        self.residual_stiffness = kappa;
        self
    }

    /// Normalisation constant `c_w = ∫₀¹ sqrt(w) dφ` of the crack density.
    pub fn c_w(&self) -> f64 {
        match self.kind {
            FractureKind::At2 => 0.5,
            FractureKind::At1 => 2.0 / 3.0,
            FractureKind::PfCzm => 4.0 / 3.0,
        }
    }

    /// PF-CZM slope constant `m = 3 E G_c / (2 ℓ σ_c²)`; zero for AT1/AT2.
    pub fn m(&self) -> f64 {
        match self.kind {
            FractureKind::PfCzm => {
                3.0 * self.young * self.toughness / (2.0 * self.length_scale * self.strength * self.strength)
            }
            _ => 0.0,
        }
    }

    pub fn h_min(&self) -> f64 {
        h_min(self)
    }

    /// `g(φ)` and its derivatives; φ must lie in [0, 1].
    pub fn degradation(&self, phi: f64) -> Result<Triple, FractureError> {
        check_bounds(phi)?;
        Ok(self.degradation_unchecked(phi.clamp(0.0, 1.0)))
    }

    /// Degradation evaluated with the same analytic expression outside [0, 1],
    /// for transient solver iterates.
    pub fn degradation_unchecked(&self, phi: f64) -> Triple {
        let a = (1.0 - phi) * (1.0 - phi);
        let da = -2.0 * (1.0 - phi);
        match self.kind {
            FractureKind::At1 | FractureKind::At2 => Triple {
                value: a,
                d1: da,
                d2: 2.0,
            },
            FractureKind::PfCzm => {
                let m = self.m();
                let b = phi * (1.0 - 0.5 * phi);
                let db = 1.0 - phi;
                let d = a + m * b;
                let dd = da + m * db;
                // numerator of g' and its derivative (the A'B' terms cancel)
                let num = m * (da * b - a * db);
                let dnum = m * (2.0 * b + a);
                Triple {
                    value: a / d,
                    d1: num / (d * d),
                    d2: dnum / (d * d) - 2.0 * num * dd / (d * d * d),
                }
            }
        }
    }

    /// `w(φ)` and its derivatives.
    pub fn dissipation(&self, phi: f64) -> Triple {
        match self.kind {
            FractureKind::At2 => Triple {
                value: phi * phi,
                d1: 2.0 * phi,
                d2: 2.0,
            },
            FractureKind::At1 => Triple {
                value: phi,
                d1: 1.0,
                d2: 0.0,
            },
            FractureKind::PfCzm => Triple {
                value: 4.0 * phi,
                d1: 4.0,
                d2: 0.0,
            },
        }
    }
}

fn check_bounds(phi: f64) -> Result<(), FractureError> {
    if !(-BOUND_TOL..=1.0 + BOUND_TOL).contains(&phi) {
        return Err(FractureError::PhaseOutOfBounds(phi));
    }
    Ok(())
}

/// `g(φ)` with derivatives for the given model.
pub fn degradation(phi: f64, model: &FractureModel) -> Result<Triple, FractureError> {
    model.degradation(phi)
}

/// `w(φ)` with derivatives for the given model.
pub fn dissipation(phi: f64, model: &FractureModel) -> Triple {
    model.dissipation(phi)
}

/// Strength implied by the homogeneous phase-field solution.
pub fn strength_estimate(kind: FractureKind, young: f64, toughness: f64, length_scale: f64) -> Result<f64, FractureError> {
    match kind {
        FractureKind::At1 => Ok((3.0 * young * toughness / (8.0 * length_scale)).sqrt()),
        FractureKind::At2 => Ok(3.0 / 16.0 * (3.0 * young * toughness / length_scale).sqrt()),
        FractureKind::PfCzm => Err(FractureError::StrengthIsInput),
    }
}

/// Damage threshold on the driving force.
pub fn h_min(model: &FractureModel) -> f64 {
    match model.kind {
        FractureKind::At1 => 3.0 * model.toughness / (16.0 * model.length_scale),
        FractureKind::PfCzm => model.strength * model.strength / (2.0 * model.young),
        FractureKind::At2 => 0.0,
    }
}

/// Running maximum of the tensile elastic energy, floored at the threshold.
pub fn update_history(h_n: f64, psi_plus: f64, h_min: f64) -> f64 {
    h_n.max(psi_plus).max(h_min)
}
