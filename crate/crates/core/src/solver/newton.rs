//! Block Newton iterations: monolithic with both blocks updated together, and
//! the single-pass staggered scheme built from two one-block solves.

use super::{
    backtracking, block_norms, factor, merit, ConvergedBy, CoupledSystem, Evaluation, IncrementResult,
    IterationRecord, Monitor, SolverConfig, SolverError, Stage,
};
use crate::assembly::Tangents;
use crate::sparse::norm;

struct BlockOutcome {
    iterations: usize,
    converged_by: ConvergedBy,
    warnings: usize,
}

/// Newton on the active blocks with the inactive block held fixed. The
/// tangent is reassembled at every iterate.
fn block_newton(
    sys: &mut dyn CoupledSystem,
    u: &mut Vec<f64>,
    phi: &mut Vec<f64>,
    active: [bool; 2],
    stage: Stage,
    cfg: &SolverConfig,
    records: &mut Vec<IterationRecord>,
) -> Result<BlockOutcome, SolverError> {
    let tangents = Tangents {
        uu: active[0],
        pp: active[1],
    };
    let mut eval = sys.evaluate(u, phi, tangents)?;
    let mut monitor = Monitor::new(cfg, active);
    let mut norms = block_norms(&eval);
    monitor.observe(norms);
    let mut warnings = 0;
    if let Some(by) = monitor.check(norms, None) {
        return Ok(BlockOutcome {
            iterations: 0,
            converged_by: by,
            warnings,
        });
    }
    for it in 1..=cfg.max_iterations {
        let du: Vec<f64> = if active[0] {
            factor(eval.k_uu.as_ref(), "displacement")?.solve(&eval.r_u).into_iter().map(|x| -x).collect()
        } else {
            vec![0.0; u.len()]
        };
        let dp: Vec<f64> = if active[1] {
            factor(eval.k_pp.as_ref(), "phase-field")?.solve(&eval.r_phi).into_iter().map(|x| -x).collect()
        } else {
            vec![0.0; phi.len()]
        };
        let scales = monitor.scales();
        let merit0 = merit(norms, scales, active);
        let mut trial: Option<Evaluation> = None;
        let ls = backtracking(merit0, cfg.line_search, |alpha| {
            let ut: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + alpha * b).collect();
            let pt: Vec<f64> = phi.iter().zip(&dp).map(|(a, b)| a + alpha * b).collect();
            let e = sys.evaluate(&ut, &pt, tangents)?;
            let m = merit(block_norms(&e), scales, active);
            trial = Some(e);
            Ok::<_, SolverError>(m)
        })?;
        if ls.warned {
            warnings += 1;
        }
        for (x, d) in u.iter_mut().zip(&du) {
            *x += ls.alpha * d;
        }
        for (x, d) in phi.iter_mut().zip(&dp) {
            *x += ls.alpha * d;
        }
        eval = trial.expect("line search evaluates at least once");
        norms = block_norms(&eval);
        monitor.observe(norms);
        records.push(IterationRecord {
            stage,
            iteration: it,
            r_u: norms[0],
            r_phi: norms[1],
            alpha: ls.alpha,
            curvature_skips: 0,
            reformed: true,
        });
        let step = [ls.alpha * norm(&du), ls.alpha * norm(&dp)];
        let size = [norm(u), norm(phi)];
        if let Some(by) = monitor.check(norms, Some((step, size))) {
            return Ok(BlockOutcome {
                iterations: it,
                converged_by: by,
                warnings,
            });
        }
    }
    Err(SolverError::NotConverged {
        iterations: cfg.max_iterations,
        r_u: norms[0],
        r_phi: norms[1],
    })
}

/// Monolithic block Newton: both blocks are corrected simultaneously from
/// freshly assembled diagonal tangents.
pub fn solve_newton(
    sys: &mut dyn CoupledSystem,
    u0: &[f64],
    phi0: &[f64],
    cfg: &SolverConfig,
) -> Result<IncrementResult, SolverError> {
    let (mut u, mut phi) = (u0.to_vec(), phi0.to_vec());
    let mut records = Vec::new();
    let out = block_newton(sys, &mut u, &mut phi, [true, true], Stage::Monolithic, cfg, &mut records)?;
    Ok(IncrementResult {
        u,
        phi,
        iterations: out.iterations,
        converged_by: out.converged_by,
        records,
        line_search_warnings: out.warnings,
    })
}

/// Single-pass staggered scheme: displacement with the phase field frozen,
/// then the phase field with the updated displacement. No outer loop.
pub fn solve_staggered(
    sys: &mut dyn CoupledSystem,
    u0: &[f64],
    phi0: &[f64],
    cfg: &SolverConfig,
) -> Result<IncrementResult, SolverError> {
    let (mut u, mut phi) = (u0.to_vec(), phi0.to_vec());
    let mut records = Vec::new();
    let first = block_newton(sys, &mut u, &mut phi, [true, false], Stage::Displacement, cfg, &mut records)?;
    let second = block_newton(sys, &mut u, &mut phi, [false, true], Stage::Phase, cfg, &mut records)?;
    let converged_by = match (first.converged_by, second.converged_by) {
        (ConvergedBy::Residual, ConvergedBy::Residual) => ConvergedBy::Residual,
        _ => ConvergedBy::Correction,
    };
    Ok(IncrementResult {
        u,
        phi,
        iterations: first.iterations + second.iterations,
        converged_by,
        records,
        line_search_warnings: first.warnings + second.warnings,
    })
}
