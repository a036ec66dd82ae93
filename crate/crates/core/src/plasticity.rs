//! Rate-independent von Mises plasticity with combined nonlinear isotropic
//! (Voce) and kinematic (Armstrong–Frederick/Chaboche) hardening.
//!
//! The update is a fully implicit radial return. All backstresses are
//! eliminated in closed form so the local problem is a single scalar equation
//! in the equivalent plastic strain increment.

use crate::tensor::{self, Sym, Tangent4, SQRT_2_3, SQRT_3_2};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

const MAX_LOCAL_ITERATIONS: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlasticityError {
    #[error("invalid material parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(
        "return mapping did not converge after {iterations} iterations \
         (trial strain {strain:?}, trial yield function {trial_yield:.6e} MPa, residual {residual:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        strain: [f64; 4],
        trial_yield: f64,
        residual: f64,
    },
}

/// One Armstrong–Frederick backstress term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Backstress {
    /// Initial kinematic hardening modulus C_k [MPa].
    pub c: f64,
    /// Dynamic recovery rate γ_k [-].
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlasticityParams {
    /// Young's modulus [MPa].
    pub young: f64,
    pub poisson: f64,
    /// Initial yield stress σ0 [MPa].
    pub yield_stress: f64,
    /// Saturated change of the yield surface size Q∞ [MPa].
    pub q_inf: f64,
    /// Isotropic hardening rate b [-].
    pub b: f64,
    pub backstresses: Vec<Backstress>,
}

impl PlasticityParams {
    pub fn new(
        young: f64,
        poisson: f64,
        yield_stress: f64,
        q_inf: f64,
        b: f64,
        backstresses: Vec<Backstress>,
    ) -> Result<Self, PlasticityError> {
        let params = Self {
            young,
            poisson,
            yield_stress,
            q_inf,
            b,
            backstresses,
        };
        params.validate()?;
        Ok(params)
    }

    /// Hot-rolled carbon steel calibration with one backstress.
    pub fn carbon_steel() -> Self {
        Self {
            young: 215_960.0,
            poisson: 0.3,
            yield_stress: 465.0,
            q_inf: 55.0,
            b: 2.38,
            backstresses: vec![Backstress {
                c: 23_554.0,
                gamma: 139.0,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), PlasticityError> {
        let bad = |name, reason: &str| {
            Err(PlasticityError::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.young > 0.0) {
            return bad("young", "must be > 0");
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return bad("poisson", "must lie in (-1, 0.5)");
        }
        if !(self.yield_stress > 0.0) {
            return bad("yield_stress", "must be > 0");
        }
        if !self.q_inf.is_finite() || !(self.b >= 0.0) {
            return bad("b", "must be >= 0 with finite q_inf");
        }
        for k in &self.backstresses {
            if !(k.c >= 0.0) || !(k.gamma >= 0.0) {
                return bad("backstresses", "C_k and gamma_k must be >= 0");
            }
        }
        Ok(())
    }

    pub fn shear_modulus(&self) -> f64 {
        self.young / (2.0 * (1.0 + self.poisson))
    }

    pub fn bulk_modulus(&self) -> f64 {
        self.young / (3.0 * (1.0 - 2.0 * self.poisson))
    }

    pub fn lame_lambda(&self) -> f64 {
        self.young * self.poisson / ((1.0 + self.poisson) * (1.0 - 2.0 * self.poisson))
    }

    pub fn elastic_stiffness(&self) -> Tangent4 {
        tensor::isotropic_stiffness(self.bulk_modulus(), self.shear_modulus())
    }

    /// Current yield stress `σ0 + Q∞ (1 - exp(-b εp))`.
    pub fn yield_stress_at(&self, eq_plastic_strain: f64) -> f64 {
        self.yield_stress + self.q_inf * (1.0 - (-self.b * eq_plastic_strain).exp())
    }

    fn yield_stress_slope(&self, eq_plastic_strain: f64) -> f64 {
        self.q_inf * self.b * (-self.b * eq_plastic_strain).exp()
    }
}

/// Current yield stress for the given equivalent plastic strain.
pub fn yield_stress(eq_plastic_strain: f64, params: &PlasticityParams) -> f64 {
    params.yield_stress_at(eq_plastic_strain)
}

/// Von Mises yield function `sqrt(3/2 (σ'-α'):(σ'-α')) - σ_Y`.
pub fn yield_function(stress: &Sym, backstress: &Sym, sigma_y: f64) -> f64 {
    tensor::SQRT_3_2 * (tensor::deviator(stress) - tensor::deviator(backstress)).norm() - sigma_y
}

/// Internal variables of one material point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlasticState {
    pub plastic_strain: Sym,
    /// Deviatoric backstresses, one per hardening term.
    pub backstresses: SmallVec<[Sym; 2]>,
    pub eq_plastic_strain: f64,
    /// Accumulated plastic work density ψp [MPa].
    pub plastic_work: f64,
}

impl PlasticState {
    pub fn virgin(params: &PlasticityParams) -> Self {
        Self {
            plastic_strain: Sym::zeros(),
            backstresses: params.backstresses.iter().map(|_| Sym::zeros()).collect(),
            eq_plastic_strain: 0.0,
            plastic_work: 0.0,
        }
    }

    pub fn total_backstress(&self) -> Sym {
        self.backstresses.iter().fold(Sym::zeros(), |acc, a| acc + a)
    }
}

/// Outcome of a strain-driven material update.
#[derive(Debug, Clone)]
pub struct ReturnMap {
    /// Undamaged stress σ0 [MPa].
    pub stress: Sym,
    /// Algorithmic tangent dσ0/dε. Not symmetric in general when the
    /// backstress direction differs from the flow direction.
    pub tangent: Tangent4,
    pub state: PlasticState,
    /// Plastic work increment Δψp [MPa].
    pub plastic_work_increment: f64,
    pub plastic: bool,
}

pub fn elastic_strain_split(strain: &Sym, state: &PlasticState) -> Sym {
    strain - state.plastic_strain
}

/// Backward-Euler return mapping from the committed state `state_n` for the
/// total strain `strain`.
pub fn return_map(
    strain: &Sym,
    state_n: &PlasticState,
    params: &PlasticityParams,
) -> Result<ReturnMap, PlasticityError> {
    let bulk = params.bulk_modulus();
    let g = params.shear_modulus();
    let elastic_trial = elastic_strain_split(strain, state_n);
    let pressure_part = bulk * tensor::trace(&elastic_trial) * tensor::identity();
    let s_trial = 2.0 * g * tensor::deviator(&elastic_trial);

    let p_n = state_n.eq_plastic_strain;
    let xi_trial = s_trial - state_n.total_backstress();
    let trial_yield = SQRT_3_2 * xi_trial.norm() - params.yield_stress_at(p_n);

    if trial_yield <= 0.0 {
        return Ok(ReturnMap {
            stress: pressure_part + s_trial,
            tangent: params.elastic_stiffness(),
            state: state_n.clone(),
            plastic_work_increment: 0.0,
            plastic: false,
        });
    }

    let tol = 1e-9 * params.yield_stress;
    let local = LocalProblem {
        params,
        g,
        s_trial: &s_trial,
        alpha_n: &state_n.backstresses,
        p_n,
    };

    let mut lo = 0.0;
    let mut hi = trial_yield / (3.0 * g);
    let mut doublings = 0;
    while local.residual(hi).0 > 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(local.failure(strain, trial_yield, f64::NAN, doublings));
        }
    }

    let mut dp = 0.0;
    let mut eval = local.residual(dp);
    let mut iterations = 0;
    while eval.0.abs() > tol {
        iterations += 1;
        if iterations > MAX_LOCAL_ITERATIONS {
            return Err(local.failure(strain, trial_yield, eval.0, iterations));
        }
        if eval.0 > 0.0 {
            lo = lo.max(dp);
        } else {
            hi = hi.min(dp);
        }
        let slope = local.slope(dp, &eval.1);
        let mut next = dp - eval.0 / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        dp = next;
        eval = local.residual(dp);
    }

    let (_, eta) = eval;
    let eta_norm = eta.norm();
    let n = eta / eta_norm;
    let d_plastic = SQRT_3_2 * dp * n;

    let mut backstresses = SmallVec::with_capacity(params.backstresses.len());
    let mut a = Sym::zeros();
    let mut h_prime = 3.0 * g + params.yield_stress_slope(p_n + dp);
    for (term, alpha_n) in params.backstresses.iter().zip(state_n.backstresses.iter()) {
        let beta = 1.0 / (1.0 + term.gamma * dp);
        backstresses.push(beta * (alpha_n + SQRT_2_3 * term.c * dp * n));
        a += term.gamma * beta * beta * alpha_n;
        h_prime += term.c * beta * beta;
    }

    let s = s_trial - 2.0 * g * d_plastic;
    let stress = pressure_part + s;

    let proj = tensor::deviatoric_projector();
    let nn = n * n.transpose();
    let n_dot_a = n.dot(&a);
    let denom = h_prime - SQRT_3_2 * n_dot_a;
    let c1 = SQRT_3_2 * 2.0 * g / denom;
    let theta = 2.0 * g * SQRT_3_2 * dp / eta_norm;
    let one = tensor::identity();
    let tangent = bulk * one * one.transpose() + 2.0 * g * proj
        - 2.0 * g * SQRT_3_2 * c1 * nn
        - theta * (2.0 * g * (proj - nn) + c1 * (a - n_dot_a * n) * n.transpose());

    // Δεp is deviatoric, so σ0:Δεp = s:Δεp.
    let work = stress.dot(&d_plastic).max(0.0);

    Ok(ReturnMap {
        stress,
        tangent,
        state: PlasticState {
            plastic_strain: state_n.plastic_strain + d_plastic,
            backstresses,
            eq_plastic_strain: p_n + dp,
            plastic_work: state_n.plastic_work + work,
        },
        plastic_work_increment: work,
        plastic: true,
    })
}

struct LocalProblem<'a> {
    params: &'a PlasticityParams,
    g: f64,
    s_trial: &'a Sym,
    alpha_n: &'a [Sym],
    p_n: f64,
}

impl LocalProblem<'_> {
    /// Consistency residual and the shifted trial deviator η(Δp).
    fn residual(&self, dp: f64) -> (f64, Sym) {
        let mut eta = *self.s_trial;
        let mut hardening = 3.0 * self.g * dp + self.params.yield_stress_at(self.p_n + dp);
        for (term, alpha) in self.params.backstresses.iter().zip(self.alpha_n) {
            let beta = 1.0 / (1.0 + term.gamma * dp);
            eta -= beta * alpha;
            hardening += term.c * beta * dp;
        }
        (SQRT_3_2 * eta.norm() - hardening, eta)
    }

    fn slope(&self, dp: f64, eta: &Sym) -> f64 {
        let n = eta / eta.norm();
        let mut slope = -3.0 * self.g - self.params.yield_stress_slope(self.p_n + dp);
        for (term, alpha) in self.params.backstresses.iter().zip(self.alpha_n) {
            let beta = 1.0 / (1.0 + term.gamma * dp);
            slope += SQRT_3_2 * term.gamma * beta * beta * n.dot(alpha) - term.c * beta * beta;
        }
        slope
    }

    fn failure(&self, strain: &Sym, trial_yield: f64, residual: f64, iterations: usize) -> PlasticityError {
        PlasticityError::NoConvergence {
            iterations,
            strain: [strain[0], strain[1], strain[2], tensor::shear(strain)],
            trial_yield,
            residual,
        }
    }
}

/// One recorded step of a uniaxial-stress material-point history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniaxialRecord {
    pub strain: f64,
    pub stress: f64,
    pub eq_plastic_strain: f64,
    pub plastic_work: f64,
}

/// Drives a single material point through an axial strain history while the
/// lateral stresses are held at zero, recovering a uniaxial stress state.
pub fn uniaxial_stress_path(
    params: &PlasticityParams,
    axial_strains: &[f64],
) -> Result<Vec<UniaxialRecord>, PlasticityError> {
    let mut state = PlasticState::virgin(params);
    let mut lateral = [0.0_f64; 2];
    let mut previous_axial = 0.0;
    let tol = 1e-10 * params.yield_stress;
    let mut out = Vec::with_capacity(axial_strains.len());

    for &axial in axial_strains {
        lateral[0] -= params.poisson * (axial - previous_axial);
        lateral[1] -= params.poisson * (axial - previous_axial);
        previous_axial = axial;
        let mut result = return_map(&tensor::sym(axial, lateral[0], lateral[1], 0.0), &state, params)?;
        for _ in 0..30 {
            let r = nalgebra::Vector2::new(result.stress[1], result.stress[2]);
            if r.amax() <= tol {
                break;
            }
            let jac = nalgebra::Matrix2::new(
                result.tangent[(1, 1)],
                result.tangent[(1, 2)],
                result.tangent[(2, 1)],
                result.tangent[(2, 2)],
            );
            let delta = jac.lu().solve(&(-r)).unwrap_or_else(nalgebra::Vector2::zeros);
            lateral[0] += delta[0];
            lateral[1] += delta[1];
            result = return_map(&tensor::sym(axial, lateral[0], lateral[1], 0.0), &state, params)?;
        }
        state = result.state;
        out.push(UniaxialRecord {
            strain: axial,
            stress: result.stress[0],
            eq_plastic_strain: state.eq_plastic_strain,
            plastic_work: state.plastic_work,
        });
    }
    Ok(out)
}
