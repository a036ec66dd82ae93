//! Execution of a cyclic load program.

use crate::assembly::{assemble, commit_states, free_part, phase_part, Discretization, GlobalSystem, Materials, QuadraturePointState, Tangents};
use crate::config::{Config, ConfigError};
use crate::load::LoadProgram;
use crate::mesh::{dof_map, resolve_constraints, DofMap, FieldState};
use crate::metrics::{max_phase, CrackPath};
use crate::output::OutputWriter;
use crate::solver::{
    solve_increment, AdaptiveStepper, CoupledSystem, Evaluation, IncrementResult, IterationRecord, SolverError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

/// The coupled finite element system for one trial increment.
struct FeSystem<'a> {
    disc: &'a Discretization,
    materials: &'a Materials,
    committed: &'a [QuadraturePointState],
    fields: FieldState,
    /// Packed unknowns and system of the latest evaluation.
    last: Option<(Vec<f64>, Vec<f64>, GlobalSystem)>,
}

impl FeSystem<'_> {
    fn scatter(&mut self, u: &[f64], phi: &[f64]) {
        let dofs = &self.disc.dofs;
        for (i, &g) in dofs.u_global.iter().enumerate() {
            self.fields.u[g] = u[i];
        }
        for (node, p) in self.fields.phi.iter_mut().enumerate() {
            *p = phi[dofs.phi_index[node]];
        }
    }
}

impl CoupledSystem for FeSystem<'_> {
    fn n_u(&self) -> usize {
        self.disc.dofs.n_free_u()
    }

    fn n_phi(&self) -> usize {
        self.disc.dofs.n_phi()
    }

    fn evaluate(&mut self, u: &[f64], phi: &[f64], tangents: Tangents) -> Result<Evaluation, SolverError> {
        self.scatter(u, phi);
        let mut sys = assemble(self.disc, self.materials, &self.fields, self.committed, tangents)
            .map_err(|e| SolverError::Evaluation(e.to_string()))?;
        let eval = Evaluation {
            r_u: free_part(&self.disc.dofs, &sys.r_u),
            r_phi: phase_part(&self.disc.dofs, &sys.r_phi),
            k_uu: sys.k_uu.take(),
            k_pp: sys.k_pp.take(),
        };
        self.last = Some((u.to_vec(), phi.to_vec(), sys));
        Ok(eval)
    }
}

/// Metrics of one nominal increment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementRecord {
    pub increment: usize,
    /// Load-program time [cycles].
    pub time: f64,
    /// Applied displacement signal [mm].
    pub displacement: f64,
    /// Reaction on the driven dofs [N/mm thickness].
    pub force: f64,
    pub max_phi: f64,
    /// Crack extension Δa [mm].
    pub crack_extension: f64,
    /// Largest accumulated fatigue variable θ̄ [MPa].
    pub theta_bar_max: f64,
    pub iterations: usize,
    pub cutbacks: usize,
    pub loading: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub records: Vec<IncrementRecord>,
    /// Cycles to failure, defined only once failure is detected.
    pub n_f: Option<f64>,
    pub failed: bool,
    /// Solver abort diagnostic; the records up to the abort stay valid.
    pub aborted: Option<String>,
    pub peak_force: f64,
    pub total_iterations: usize,
    pub total_cutbacks: usize,
}

/// Outcome of [`Simulation::step`].
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Advanced(IncrementRecord),
    /// The program is exhausted or failure was already detected.
    Finished,
}

/// A converged sub-step, not yet committed.
struct Converged {
    fields: FieldState,
    system: GlobalSystem,
    result: IncrementResult,
}

/// Mutable state of a run: committed fields and point states plus the
/// bookkeeping needed for the metrics.
pub struct Simulation {
    pub config: Config,
    pub disc: Discretization,
    pub materials: Materials,
    pub program: LoadProgram,
    pub fields: FieldState,
    pub states: Vec<QuadraturePointState>,
    pub metrics: RunMetrics,
    failure_nodes: Option<Vec<usize>>,
    crack: Option<CrackPath>,
    driven: Vec<(usize, f64)>,
    stepper: AdaptiveStepper,
    increment: usize,
    /// Iteration records of the last nominal increment, tagged with the
    /// sub-step count.
    pub last_log: Vec<(usize, IterationRecord)>,
}

impl Simulation {
    pub fn new(config: Config) -> Result<Self, ConfigError> {
        let mesh = config.build_mesh()?;
        let materials = config.materials()?;
        let program = config.load_program()?;
        let constraints = resolve_constraints(&mesh, &config.load.boundary)?;
        let dofs: DofMap = dof_map(&mesh, &constraints);
        let failure_nodes = match &config.output.failure_set {
            Some(set) => Some(mesh.node_set(set)?.to_vec()),
            None => None,
        };
        let crack = match &config.output.crack_path {
            Some(points) => Some(CrackPath::new(&mesh, points).map_err(|e| ConfigError::Invalid {
                key: "output.crack_path".into(),
                reason: e.to_string(),
            })?),
            None => None,
        };
        let driven = dofs
            .constraints
            .iter()
            .filter(|c| c.scale != 0.0)
            .map(|c| (c.global(), c.scale.signum()))
            .collect();
        let disc = Discretization::new(mesh, dofs)?;
        let states = disc.virgin_states(&materials);
        let fields = FieldState::zeros(disc.mesh.n_nodes());
        let stepper = AdaptiveStepper::new(1.0 / program.increments_per_cycle as f64);
        Ok(Self {
            config,
            disc,
            materials,
            program,
            fields,
            states,
            metrics: RunMetrics {
                records: Vec::new(),
                n_f: None,
                failed: false,
                aborted: None,
                peak_force: 0.0,
                total_iterations: 0,
                total_cutbacks: 0,
            },
            failure_nodes,
            crack,
            driven,
            stepper,
            increment: 0,
            last_log: Vec::new(),
        })
    }

    pub fn is_finished(&self) -> bool {
        self.metrics.failed || self.metrics.aborted.is_some() || self.increment >= self.program.n_increments()
    }

    /// Solves from the committed state to time `t`.
    fn attempt(&self, t: f64) -> Result<Converged, SolverError> {
        let dofs = &self.disc.dofs;
        let mut fields = self.fields.clone();
        fields.time = t;
        fields.apply_constraints(dofs, self.program.signal(t));
        let u0 = free_part(dofs, &fields.u);
        let p0 = phase_part(dofs, &fields.phi);
        let mut sys = FeSystem {
            disc: &self.disc,
            materials: &self.materials,
            committed: &self.states,
            fields,
            last: None,
        };
        let result = solve_increment(&mut sys, &u0, &p0, &self.config.solver)?;
        sys.scatter(&result.u, &result.phi);
        let mut fields = sys.fields.clone();
        let raw = fields.phi.clone();
        fields.clamp_phase();
        if !fields.is_finite() {
            return Err(SolverError::Evaluation("non-finite field after convergence".into()));
        }
        // reuse the latest evaluation when it sits at the converged iterate
        // and the clamp left the phase field alone
        let system = match sys.last.take() {
            Some((u, p, s)) if raw == fields.phi && u == result.u && p == result.phi => s,
            _ => assemble(&self.disc, &self.materials, &fields, &self.states, Tangents::NONE)
                .map_err(|e| SolverError::Evaluation(e.to_string()))?,
        };
        Ok(Converged { fields, system, result })
    }

    fn commit(&mut self, c: Converged) {
        self.states = commit_states(&self.disc, &self.materials, &c.fields.phi, &c.system.trial);
        self.fields = c.fields;
    }

    fn force(&self, r_u: &[f64]) -> f64 {
        self.driven.iter().map(|&(g, s)| s * r_u[g]).sum()
    }

    /// Advances one nominal increment, cutting the step back on failure.
    /// A cut-back limit marks the run as aborted.
    pub fn step(&mut self) -> StepOutcome {
        if self.is_finished() {
            return StepOutcome::Finished;
        }
        let k = self.increment + 1;
        let target = self.program.time_of(k);
        let mut iterations = 0;
        let mut cutbacks = 0;
        let mut substep = 0;
        self.last_log.clear();
        let mut force: f64;
        loop {
            let remaining = target - self.fields.time;
            let dt = self.stepper.next_step(remaining);
            let t = if dt == remaining { target } else { self.fields.time + dt };
            match self.attempt(t) {
                Ok(c) => {
                    substep += 1;
                    iterations += c.result.iterations;
                    if c.result.line_search_warnings > 0 {
                        log::warn!(
                            "increment {k}: line search fell back to the minimum step {} time(s)",
                            c.result.line_search_warnings
                        );
                    }
                    self.last_log.extend(c.result.records.iter().cloned().map(|r| (substep, r)));
                    force = self.force(&c.system.r_u);
                    self.commit(c);
                    self.stepper.on_success();
                    if t == target {
                        break;
                    }
                }
                Err(e) => {
                    log::info!("increment {k}: cutting back at t = {t:.6} ({e})");
                    cutbacks += 1;
                    if let Err(limit) = self.stepper.on_failure() {
                        self.metrics.aborted = Some(format!("increment {k} at t = {t:.6}: {limit}; last error: {e}"));
                        self.metrics.total_cutbacks += cutbacks - 1;
                        return StepOutcome::Finished;
                    }
                }
            }
        }
        self.increment = k;
        self.fields.time = target;

        let max_phi = max_phase(&self.fields.phi, self.failure_nodes.as_deref());
        let previous = self.metrics.records.last().map_or(0.0, |r| r.crack_extension);
        let crack_extension = match &self.crack {
            Some(path) => path.extension(&self.fields.phi, self.config.output.crack_threshold).max(previous),
            None => 0.0,
        };
        let theta_bar_max = self.states.iter().map(|s| s.fatigue.accumulated).fold(0.0, f64::max);
        let record = IncrementRecord {
            increment: k,
            time: target,
            displacement: self.program.signal(target),
            force,
            max_phi,
            crack_extension,
            theta_bar_max,
            iterations,
            cutbacks,
            loading: self.program.loading(target),
        };
        let m = &mut self.metrics;
        m.total_iterations += iterations;
        m.total_cutbacks += cutbacks;
        if force.abs() > m.peak_force.abs() {
            m.peak_force = force;
        }
        if max_phi >= self.config.output.failure_threshold {
            m.failed = true;
            m.n_f = Some(target);
        }
        m.records.push(record.clone());
        StepOutcome::Advanced(record)
    }

    /// Runs the program to completion, failure or abort, streaming results
    /// to `writer` when given.
    pub fn run(&mut self, mut writer: Option<&mut OutputWriter>) -> Result<&RunMetrics, RunError> {
        if let Some(w) = writer.as_deref_mut() {
            w.write_config(&self.config)?;
        }
        while let StepOutcome::Advanced(record) = self.step() {
            log::debug!(
                "increment {} t = {:.4} force = {:.6e} max φ = {:.4} Δa = {:.4}",
                record.increment,
                record.time,
                record.force,
                record.max_phi,
                record.crack_extension
            );
            if let Some(w) = writer.as_deref_mut() {
                w.write_increment(&record, &self.last_log)?;
                let cycle = record.time.round();
                if (record.time - cycle).abs() < 1e-12 && self.config.output.snapshot_cycles.contains(&(cycle as usize)) {
                    w.write_snapshot(&format!("{}", cycle as usize), &self.disc, &self.fields, &self.states)?;
                }
            }
        }
        if let Some(w) = writer {
            if self.metrics.aborted.is_some() {
                w.write_snapshot("abort", &self.disc, &self.fields, &self.states)?;
            }
            w.write_summary(&self.metrics, &self.config)?;
        }
        Ok(&self.metrics)
    }
}

/// Runs `config` in memory without writing any files.
pub fn run(config: Config) -> Result<RunMetrics, RunError> {
    let mut sim = Simulation::new(config)?;
    sim.run(None)?;
    Ok(sim.metrics)
}
