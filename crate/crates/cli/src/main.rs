//! `simulate`: run a phase-field fatigue simulation from a TOML config.
//!
//! Exit codes: 0 when the run completes (failure reached or cycles
//! exhausted), 1 on configuration errors, 2 when the solver aborts.

use clap::Parser;
use pffatigue::config::Config;
use pffatigue::driver::Simulation;
use pffatigue::output::OutputWriter;
use pffatigue::solver::Scheme;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "simulate", version, about = "Phase-field fatigue fracture simulation")]
struct Args {
    /// Simulation config (TOML).
    config: PathBuf,
    /// Directory for results; overrides `output.directory`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Nonlinear scheme; overrides `solver.scheme`.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Overrides `load.increments_per_cycle`.
    #[arg(long)]
    increments_per_cycle: Option<usize>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let mut config = match Config::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    if let Some(s) = args.scheme {
        config.solver.scheme = s;
    }
    if let Some(n) = args.increments_per_cycle {
        config.load.increments_per_cycle = n;
    }
    if let Err(e) = config.validate() {
        log::error!("{e}");
        return ExitCode::from(1);
    }
    let dir = args
        .output_dir
        .or_else(|| config.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("output"));

    let mut sim = match Simulation::new(config) {
        Ok(s) => s,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(1);
        }
    };
    let mut writer = match OutputWriter::create(&dir) {
        Ok(w) => w,
        Err(e) => {
            log::error!("cannot write to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    };
    log::info!(
        "{} nodes, {} elements, {} increments",
        sim.disc.mesh.n_nodes(),
        sim.disc.mesh.n_elements(),
        sim.program.n_increments()
    );
    let metrics = match sim.run(Some(&mut writer)) {
        Ok(m) => m,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(reason) = &metrics.aborted {
        log::error!("solver abort: {reason}");
        return ExitCode::from(2);
    }
    match metrics.n_f {
        Some(n) => log::info!("failure after {n} cycles"),
        None => log::info!("completed {} increments without failure", metrics.records.len()),
    }
    log::info!("results in {}", dir.display());
    ExitCode::SUCCESS
}
