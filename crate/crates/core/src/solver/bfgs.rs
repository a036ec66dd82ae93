//! Limited-memory BFGS on the monolithic system.
//!
//! The inverse operator is the BFGS update of a factorised block-diagonal
//! seed, applied by the two-loop recursion over the stored correction and
//! residual-change pairs. No dense matrix is ever formed.

use super::{
    backtracking, block_norms, factor, merit, CoupledSystem, Evaluation, IncrementResult,
    IterationRecord, Monitor, SolverConfig, SolverError, Stage,
};
use crate::assembly::Tangents;
use crate::sparse::{norm, Factor};

/// Curvature skips tolerated before the seed is reassembled.
const REFORM_AFTER_SKIPS: usize = 10;

/// An update rejected because `Δzᵀ Δr ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSkip {
    pub curvature: f64,
}

/// Stored secant pairs of a BFGS inverse operator.
#[derive(Debug, Clone, Default)]
pub struct Bfgs {
    pairs: Vec<(Vec<f64>, Vec<f64>, f64)>,
    pub skips: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl Bfgs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
        self.skips = 0;
    }

    /// Records the pair `(Δz, Δr)`; skipped unless the curvature is positive.
    pub fn update(&mut self, dz: Vec<f64>, dr: Vec<f64>) -> Result<(), CurvatureSkip> {
        let curvature = dot(&dz, &dr);
        if !(curvature > 0.0) || !curvature.is_finite() {
            self.skips += 1;
            return Err(CurvatureSkip { curvature });
        }
        self.pairs.push((dz, dr, 1.0 / curvature));
        Ok(())
    }

    /// Applies the updated inverse `K̃⁻¹` to `r`, where `seed_solve` applies
    /// the inverse of the seed.
    pub fn apply(&self, r: &[f64], seed_solve: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
        let mut q = r.to_vec();
        let mut alphas = vec![0.0; self.pairs.len()];
        for (k, (s, y, rho)) in self.pairs.iter().enumerate().rev() {
            alphas[k] = rho * dot(s, &q);
            axpy(-alphas[k], y, &mut q);
        }
        let mut z = seed_solve(&q);
        for ((s, y, rho), a) in self.pairs.iter().zip(&alphas) {
            let b = rho * dot(y, &z);
            axpy(a - b, s, &mut z);
        }
        z
    }
}

struct Seed {
    fu: Factor,
    fp: Factor,
    n_u: usize,
}

impl Seed {
    fn new(e: &Evaluation) -> Result<Self, SolverError> {
        Ok(Self {
            fu: factor(e.k_uu.as_ref(), "displacement")?,
            fp: factor(e.k_pp.as_ref(), "phase-field")?,
            n_u: e.r_u.len(),
        })
    }

    fn solve(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.fu.solve(&v[..self.n_u]);
        out.extend(self.fp.solve(&v[self.n_u..]));
        out
    }
}

fn stacked(e: &Evaluation) -> Vec<f64> {
    [e.r_u.as_slice(), e.r_phi.as_slice()].concat()
}

pub(crate) fn solve_bfgs(
    sys: &mut dyn CoupledSystem,
    u0: &[f64],
    phi0: &[f64],
    cfg: &SolverConfig,
) -> Result<IncrementResult, SolverError> {
    let n_u = sys.n_u();
    let mut z: Vec<f64> = [u0, phi0].concat();
    let mut eval = sys.evaluate(u0, phi0, Tangents::BOTH)?;
    let mut seed = Seed::new(&eval)?;
    let mut monitor = Monitor::new(cfg, [true, true]);
    let mut norms = block_norms(&eval);
    monitor.observe(norms);
    let mut records = Vec::new();
    let mut warnings = 0;
    let result = |z: &[f64], iterations, by, records, warnings| IncrementResult {
        u: z[..n_u].to_vec(),
        phi: z[n_u..].to_vec(),
        iterations,
        converged_by: by,
        records,
        line_search_warnings: warnings,
    };
    if let Some(by) = monitor.check(norms, None) {
        return Ok(result(&z, 0, by, records, warnings));
    }

    let mut bfgs = Bfgs::new();
    let mut skips_since_reform = 0;
    for it in 1..=cfg.max_iterations {
        let r = stacked(&eval);
        let d: Vec<f64> = bfgs.apply(&r, |v| seed.solve(v)).into_iter().map(|x| -x).collect();
        let scales = monitor.scales();
        let merit0 = merit(norms, scales, [true, true]);
        let mut trial: Option<Evaluation> = None;
        let ls = backtracking(merit0, cfg.line_search, |alpha| {
            let zt: Vec<f64> = z.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            let e = sys.evaluate(&zt[..n_u], &zt[n_u..], Tangents::NONE)?;
            let m = merit(block_norms(&e), scales, [true, true]);
            trial = Some(e);
            Ok::<_, SolverError>(m)
        })?;
        if ls.warned {
            warnings += 1;
        }
        let new_eval = trial.expect("line search evaluates at least once");
        let s: Vec<f64> = d.iter().map(|x| ls.alpha * x).collect();
        let r_new = stacked(&new_eval);
        let y: Vec<f64> = r_new.iter().zip(&r).map(|(a, b)| a - b).collect();
        for (zi, si) in z.iter_mut().zip(&s) {
            *zi += si;
        }
        eval = new_eval;
        norms = block_norms(&eval);
        monitor.observe(norms);

        let step = [norm(&s[..n_u]), norm(&s[n_u..])];
        let size = [norm(&z[..n_u]), norm(&z[n_u..])];
        if let Some(by) = monitor.check(norms, Some((step, size))) {
            records.push(IterationRecord {
                stage: Stage::Monolithic,
                iteration: it,
                r_u: norms[0],
                r_phi: norms[1],
                alpha: ls.alpha,
                curvature_skips: bfgs.skips,
                reformed: false,
            });
            return Ok(result(&z, it, by, records, warnings));
        }

        if bfgs.update(s, y).is_err() {
            skips_since_reform += 1;
            log::debug!("BFGS curvature skip at iteration {it}");
        }
        let scheduled = cfg.bfgs_reform_every > 0 && it % cfg.bfgs_reform_every == 0;
        let reformed = scheduled || skips_since_reform >= REFORM_AFTER_SKIPS;
        if reformed {
            let e = sys.evaluate(&z[..n_u], &z[n_u..], Tangents::BOTH)?;
            seed = Seed::new(&e)?;
            eval = e;
            bfgs.clear();
            skips_since_reform = 0;
        }
        records.push(IterationRecord {
            stage: Stage::Monolithic,
            iteration: it,
            r_u: norms[0],
            r_phi: norms[1],
            alpha: ls.alpha,
            curvature_skips: bfgs.skips,
            reformed,
        });
    }
    Err(SolverError::NotConverged {
        iterations: cfg.max_iterations,
        r_u: norms[0],
        r_phi: norms[1],
    })
}
