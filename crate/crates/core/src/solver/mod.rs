//! Nonlinear solution of one load increment of the coupled `(u, φ)` system.
//!
//! Three schemes share the same residual interface:
//! limited-memory BFGS on the monolithic system, block Newton with
//! reassembly every iteration, and a single-pass staggered scheme that
//! solves the displacement block and then the phase-field block.

mod bfgs;
mod line_search;
mod newton;
mod stepping;

pub use bfgs::{Bfgs, CurvatureSkip};
pub use line_search::{backtracking, LineSearchOutcome, ALPHA_MIN, SUFFICIENT_DECREASE};
pub use newton::{solve_newton, solve_staggered};
pub use stepping::{AdaptiveStepper, CutbackLimit, MAX_CUTBACKS};

use crate::assembly::Tangents;
use crate::sparse::{norm, Factor};
use nalgebra_sparse::CscMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute residual floor used by the convergence test.
pub const ABSOLUTE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("residual evaluation failed: {0}")]
    Evaluation(String),
    #[error("{block} tangent is not positive definite")]
    Factorization { block: &'static str },
    #[error("no convergence after {iterations} iterations (|R_u| = {r_u:.3e}, |R_phi| = {r_phi:.3e})")]
    NotConverged { iterations: usize, r_u: f64, r_phi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Bfgs,
    Newton,
    Staggered,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfgs" => Ok(Scheme::Bfgs),
            "newton" => Ok(Scheme::Newton),
            "staggered" => Ok(Scheme::Staggered),
            other => Err(format!("unknown scheme `{other}` (expected bfgs, newton or staggered)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Relative residual tolerance per block.
    pub tol_residual: f64,
    /// Relative correction tolerance per block.
    pub tol_correction: f64,
    pub max_iterations: usize,
    /// Reassemble the BFGS seed every this many iterations; 0 keeps the
    /// seed from the start of the increment.
    pub bfgs_reform_every: usize,
    pub line_search: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Bfgs,
            tol_residual: 1e-6,
            tol_correction: 1e-8,
            max_iterations: 100,
            bfgs_reform_every: 0,
            line_search: true,
        }
    }
}

/// Residuals and requested tangent blocks at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub r_u: Vec<f64>,
    pub r_phi: Vec<f64>,
    pub k_uu: Option<CscMatrix<f64>>,
    pub k_pp: Option<CscMatrix<f64>>,
}

/// A two-block nonlinear system `R_u(u, φ) = 0`, `R_φ(u, φ) = 0` whose
/// diagonal tangent blocks are symmetric positive definite.
pub trait CoupledSystem {
    fn n_u(&self) -> usize;
    fn n_phi(&self) -> usize;
    fn evaluate(&mut self, u: &[f64], phi: &[f64], tangents: Tangents) -> Result<Evaluation, SolverError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Monolithic,
    Displacement,
    Phase,
}

/// One nonlinear iteration, for the convergence log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub stage: Stage,
    pub iteration: usize,
    pub r_u: f64,
    pub r_phi: f64,
    pub alpha: f64,
    pub curvature_skips: usize,
    pub reformed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergedBy {
    Residual,
    Correction,
}

#[derive(Debug, Clone)]
pub struct IncrementResult {
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub iterations: usize,
    pub converged_by: ConvergedBy,
    pub records: Vec<IterationRecord>,
    pub line_search_warnings: usize,
}

/// Solves one increment with the configured scheme from `(u0, φ0)`.
pub fn solve_increment(
    sys: &mut dyn CoupledSystem,
    u0: &[f64],
    phi0: &[f64],
    cfg: &SolverConfig,
) -> Result<IncrementResult, SolverError> {
    match cfg.scheme {
        Scheme::Bfgs => bfgs::solve_bfgs(sys, u0, phi0, cfg),
        Scheme::Newton => solve_newton(sys, u0, phi0, cfg),
        Scheme::Staggered => solve_staggered(sys, u0, phi0, cfg),
    }
}

/// Per-block convergence bookkeeping. The reference norm of a block is the
/// largest residual norm seen during the increment.
#[derive(Debug, Clone)]
pub(crate) struct Monitor {
    tol_r: f64,
    tol_c: f64,
    reference: [f64; 2],
    active: [bool; 2],
}

impl Monitor {
    pub(crate) fn new(cfg: &SolverConfig, active: [bool; 2]) -> Self {
        Self {
            tol_r: cfg.tol_residual,
            tol_c: cfg.tol_correction,
            reference: [0.0; 2],
            active,
        }
    }

    pub(crate) fn observe(&mut self, norms: [f64; 2]) {
        for b in 0..2 {
            self.reference[b] = self.reference[b].max(norms[b]);
        }
    }

    fn residual_ok(&self, norms: [f64; 2]) -> bool {
        (0..2).all(|b| !self.active[b] || norms[b] <= (self.tol_r * self.reference[b]).max(ABSOLUTE_FLOOR))
    }

    /// Residual test, or correction test once an update has been taken.
    pub(crate) fn check(&self, norms: [f64; 2], correction: Option<([f64; 2], [f64; 2])>) -> Option<ConvergedBy> {
        if self.residual_ok(norms) {
            return Some(ConvergedBy::Residual);
        }
        let (step, size) = correction?;
        let small = (0..2).all(|b| !self.active[b] || step[b] <= self.tol_c * size[b].max(1e-300));
        // a vanishing correction only counts when the residual is already
        // close to its target
        let near = (0..2).all(|b| {
            !self.active[b] || norms[b] <= (self.tol_r.sqrt() * self.reference[b]).max(ABSOLUTE_FLOOR)
        });
        (small && near).then_some(ConvergedBy::Correction)
    }

    /// Scale for the line-search merit function.
    pub(crate) fn scales(&self) -> [f64; 2] {
        let mut s = [1.0; 2];
        for b in 0..2 {
            s[b] = self.reference[b].max(ABSOLUTE_FLOOR / self.tol_r);
        }
        s
    }
}

pub(crate) fn block_norms(e: &Evaluation) -> [f64; 2] {
    [norm(&e.r_u), norm(&e.r_phi)]
}

pub(crate) fn merit(norms: [f64; 2], scales: [f64; 2], active: [bool; 2]) -> f64 {
    (0..2)
        .filter(|&b| active[b])
        .map(|b| (norms[b] / scales[b]).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn factor(k: Option<&CscMatrix<f64>>, block: &'static str) -> Result<Factor, SolverError> {
    let k = k.ok_or_else(|| SolverError::Evaluation(format!("{block} tangent missing")))?;
    Factor::new(k).map_err(|_| SolverError::Factorization { block })
}

#[cfg(test)]
pub(crate) mod toy {
    //! Small dense coupled systems used as oracles.

    use super::*;
    use crate::sparse::BlockPattern;
    use nalgebra::{DMatrix, DVector};

    /// `R_u = A u + C φ + a∘u³ - b`, `R_φ = Cᵀ u + D φ + d∘φ³ - c` with the
    /// diagonal blocks of the Jacobian reported as tangents.
    pub struct Toy {
        pub a: DMatrix<f64>,
        pub c: DMatrix<f64>,
        pub d: DMatrix<f64>,
        pub cubic_u: f64,
        pub cubic_phi: f64,
        pub b: DVector<f64>,
        pub rhs_phi: DVector<f64>,
        pub evaluations: usize,
    }

    fn dense_to_csc(m: &DMatrix<f64>) -> CscMatrix<f64> {
        let n = m.nrows();
        let rows: Vec<Option<usize>> = (0..n).map(Some).collect();
        let p = BlockPattern::new(n, &[rows]);
        let values: Vec<f64> = (0..n).flat_map(|c| (0..n).map(move |r| (r, c))).map(|(r, c)| m[(r, c)]).collect();
        p.to_matrix(values)
    }

    impl CoupledSystem for Toy {
        fn n_u(&self) -> usize {
            self.a.nrows()
        }

        fn n_phi(&self) -> usize {
            self.d.nrows()
        }

        fn evaluate(&mut self, u: &[f64], phi: &[f64], t: Tangents) -> Result<Evaluation, SolverError> {
            self.evaluations += 1;
            let u = DVector::from_column_slice(u);
            let p = DVector::from_column_slice(phi);
            let ru = &self.a * &u + &self.c * &p + u.map(|x| self.cubic_u * x.powi(3)) - &self.b;
            let rp = self.c.transpose() * &u + &self.d * &p + p.map(|x| self.cubic_phi * x.powi(3)) - &self.rhs_phi;
            let kuu = &self.a + DMatrix::from_diagonal(&u.map(|x| 3.0 * self.cubic_u * x * x));
            let kpp = &self.d + DMatrix::from_diagonal(&p.map(|x| 3.0 * self.cubic_phi * x * x));
            Ok(Evaluation {
                r_u: ru.as_slice().to_vec(),
                r_phi: rp.as_slice().to_vec(),
                k_uu: t.uu.then(|| dense_to_csc(&kuu)),
                k_pp: t.pp.then(|| dense_to_csc(&kpp)),
            })
        }
    }

    pub fn toy(cubic: f64) -> Toy {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 3.0]);
        let d = DMatrix::from_row_slice(2, 2, &[3.0, 0.5, 0.5, 2.0]);
        let c = DMatrix::from_row_slice(3, 2, &[0.5, 0.0, -0.3, 0.4, 0.0, 0.6]);
        Toy {
            a,
            c,
            d,
            cubic_u: cubic,
            cubic_phi: cubic,
            b: DVector::from_column_slice(&[1.0, -2.0, 0.5]),
            rhs_phi: DVector::from_column_slice(&[0.3, -1.0]),
            evaluations: 0,
        }
    }
}
