//! Whole runs through the driver and the files they leave behind.

mod common;

use common::Hardening;
use pffatigue::config::Config;
use pffatigue::driver::{run, IncrementRecord, Simulation, StepOutcome};
use pffatigue::fracture::{FractureKind, FractureModel};
use pffatigue::output::OutputWriter;
use std::path::Path;

fn single_element(amplitude: f64, model: &str, extra: &str) -> Config {
    let text = format!(
        r#"
[mesh]
kind = "rectangle"
width = 1.0
height = 1.0
nx = 1
ny = 1

[material]
young = 215960.0
poisson = 0.3
yield_stress = 1.0e9

[fracture]
model = "{model}"
toughness = 2.7
length_scale = 0.25

[load]
amplitude = {amplitude:?}
increments_per_cycle = 4
cycles = 2
boundary = [
    {{ set = "bottom", dof = "y" }},
    {{ set = "left", dof = "x" }},
    {{ set = "top", dof = "y", scale = 1.0 }},
]

[solver]
tol_residual = 1e-12
tol_correction = 1e-14
max_iterations = 200
{extra}
"#
    );
    Config::parse(&text).unwrap()
}

fn run_to(dir: &Path, config: Config) -> Simulation {
    let mut sim = Simulation::new(config).unwrap();
    let mut writer = OutputWriter::create(dir).unwrap();
    sim.run(Some(&mut writer)).unwrap();
    sim
}

fn read_history(dir: &Path) -> Vec<IncrementRecord> {
    csv::Reader::from_path(dir.join("history.csv"))
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn zero_amplitude_leaves_the_plate_intact() {
    let mut config = common::compact_with(16, 0.0, 4, 2);
    config.output.failure_set = None;
    let metrics = run(config).unwrap();
    assert_eq!(metrics.n_f, None);
    assert!(!metrics.failed);
    assert!(metrics.records.iter().all(|r| r.max_phi == 0.0 && r.crack_extension == 0.0));
}

#[test]
fn homogeneous_phase_field_matches_the_scalar_root() {
    let amplitude = 4e-3;
    let config = single_element(amplitude, "at2", "");
    let mut sim = Simulation::new(config).unwrap();
    assert!(matches!(sim.step(), StepOutcome::Advanced(_)));

    // uniaxial plane strain with a free lateral face
    let (e, nu) = (215_960.0, 0.3);
    let (bulk, mu) = (e / (3.0 * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)));
    let eps = [-nu / (1.0 - nu) * amplitude, amplitude, 0.0];
    let tr: f64 = eps.iter().sum();
    let dev: f64 = eps.iter().map(|x| (x - tr / 3.0).powi(2)).sum();
    let h = 0.5 * bulk * tr.max(0.0).powi(2) + mu * dev;

    let model = FractureModel::new(FractureKind::At2, 2.7, 0.25, e, None).unwrap();
    let residual = |phi: f64| {
        let g = model.degradation(phi).unwrap();
        let w = model.dissipation(phi);
        g.d1 * h + model.toughness / (2.0 * model.c_w() * model.length_scale) * 0.5 * w.d1
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    assert!(root > 0.05 && root < 0.95, "choose a load with a non-trivial root, got {root}");
    for &p in &sim.fields.phi {
        assert!((p - root).abs() < 1e-8, "{p} vs {root}");
    }
}

#[test]
fn elastic_symmetric_cycle_gives_antisymmetric_force() {
    // AT1 below its damage threshold keeps φ at zero
    let config = single_element(1e-4, "at1", "");
    let metrics = run(config).unwrap();
    assert!(metrics.records.iter().all(|r| r.max_phi.abs() < 1e-12));
    let f = |k: usize| metrics.records[k - 1].force;
    let peak = f(1);
    assert!(peak > 0.0);
    for k in 1..=6 {
        let (a, b) = (f(k), f(k + 2));
        assert!((a + b).abs() <= 1e-8 * peak, "increments {k} and {}: {a} {b}", k + 2);
    }
}

#[test]
fn history_has_one_row_per_increment_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let sim = run_to(dir.path(), common::compact_with(16, 0.004, 8, 1));
    let rows = read_history(dir.path());
    assert_eq!(rows.len(), 8);
    for (a, b) in rows.iter().zip(&sim.metrics.records) {
        for (x, y) in [
            (a.time, b.time),
            (a.displacement, b.displacement),
            (a.force, b.force),
            (a.max_phi, b.max_phi),
            (a.crack_extension, b.crack_extension),
            (a.theta_bar_max, b.theta_bar_max),
        ] {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        assert_eq!((a.increment, a.iterations, a.cutbacks, a.loading), (b.increment, b.iterations, b.cutbacks, b.loading));
    }
    let header = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert!(header.starts_with("increment,time,displacement,force,max_phi,crack_extension,theta_bar_max,iterations,cutbacks,loading\n"));
}

#[test]
fn failure_on_the_first_increment_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = single_element(4e-3, "at2", "");
    config.fracture.toughness = 0.05;
    let sim = run_to(dir.path(), config);
    assert_eq!(sim.metrics.n_f, Some(0.25));
    let text = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "failed");
    assert_eq!(summary["n_f"], 0.25);
}

#[test]
fn snapshots_at_requested_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = common::compact_with(8, 0.001, 4, 28);
    config.output.snapshot_cycles = vec![12, 20, 28];
    run_to(dir.path(), config);
    let mut vtk: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".vtk"))
        .collect();
    vtk.sort();
    assert_eq!(vtk, ["fields_12.vtk", "fields_20.vtk", "fields_28.vtk"]);
    let text = std::fs::read_to_string(dir.path().join("fields_20.vtk")).unwrap();
    for needle in ["DATASET UNSTRUCTURED_GRID", "VECTORS u double", "SCALARS phi double 1", "SCALARS plastic_work", "SCALARS history", "SCALARS theta_bar"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_to(a.path(), common::compact_with(16, 0.006, 8, 2));
    run_to(b.path(), common::compact_with(16, 0.006, 8, 2));
    let read = |d: &Path| std::fs::read(d.join("history.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn compact_configuration_echo_round_trips() {
    let config = common::compact(0.05, 16, 30);
    assert_eq!(config.load.ratio, -1.0);
    assert_eq!((config.fracture.toughness, config.fracture.length_scale), (2.7, 0.25));
    let echo = config.to_toml();
    let back = Config::parse(&echo).unwrap();
    assert_eq!(back, config);
    assert_eq!(back.to_toml(), echo);
}

#[test]
fn solver_abort_flushes_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = common::compact_with(16, 0.006, 8, 2);
    config.solver.max_iterations = 1;
    config.solver.tol_residual = 1e-14;
    let sim = run_to(dir.path(), config);
    let reason = sim.metrics.aborted.as_deref().expect("the run should abort");
    assert!(reason.contains("increment 1"), "{reason}");
    assert!(dir.path().join("fields_abort.vtk").exists());
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"aborted\""));
}

#[test]
fn higher_fatigue_threshold_extends_life() {
    for amplitude in [0.03, 0.05, 0.07] {
        let base = common::uniaxial(amplitude, 50.0, 0.4, "law = \"asymptotic\"", Hardening::Combined);
        let doubled = common::uniaxial(
            amplitude,
            50.0,
            0.4,
            &format!("law = \"asymptotic\"\nthreshold = {:?}", 2.0 * 50.0 / (12.0 * 0.4)),
            Hardening::Combined,
        );
        let n1 = run(base).unwrap().n_f.expect("base run fails");
        let n2 = run(doubled).unwrap().n_f.expect("doubled run fails");
        assert!(n2 > n1, "amplitude {amplitude}: {n2} vs {n1}");
    }
}

#[test]
fn maximum_phase_field_never_drops() {
    let mut config = common::compact_with(16, 0.007, 8, 3);
    config.output.failure_set = None;
    let metrics = run(config).unwrap();
    for w in metrics.records.windows(2) {
        assert!(w[1].max_phi >= w[0].max_phi - 1e-9);
    }
}
