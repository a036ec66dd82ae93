//! Result files: `history.csv`, `fields_<n>.vtk`, `summary.json`,
//! `convergence.log` and the echoed `config.toml`.
//!
//! Rows are flushed as they are written so a crashed run leaves a readable
//! history behind.

use crate::assembly::{Discretization, QuadraturePointState};
use crate::config::Config;
use crate::driver::{IncrementRecord, RunMetrics};
use crate::element::ElementKind;
use crate::mesh::FieldState;
use crate::solver::IterationRecord;
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub struct OutputWriter {
    dir: PathBuf,
    history: csv::Writer<File>,
    log: BufWriter<File>,
}

impl OutputWriter {
    /// Creates the directory if needed and opens the streamed files.
    pub fn create(dir: impl AsRef<Path>) -> io::Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let history = csv::Writer::from_path(dir.join("history.csv"))?;
        let mut log = BufWriter::new(File::create(dir.join("convergence.log"))?);
        writeln!(log, "# increment substep stage iteration r_u r_phi alpha curvature_skips reformed")?;
        log.flush()?;
        Ok(Self { dir, history, log })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_config(&mut self, config: &Config) -> io::Result<()> {
        std::fs::write(self.dir.join("config.toml"), config.to_toml())
    }

    pub fn write_increment(&mut self, record: &IncrementRecord, iterations: &[(usize, IterationRecord)]) -> io::Result<()> {
        self.history.serialize(record).map_err(io::Error::other)?;
        self.history.flush()?;
        for (substep, it) in iterations {
            writeln!(
                self.log,
                "{} {} {:?} {} {:e} {:e} {} {} {}",
                record.increment,
                substep,
                it.stage,
                it.iteration,
                it.r_u,
                it.r_phi,
                it.alpha,
                it.curvature_skips,
                it.reformed
            )?;
        }
        self.log.flush()
    }

    /// Writes `fields_<tag>.vtk`.
    pub fn write_snapshot(
        &mut self,
        tag: &str,
        disc: &Discretization,
        fields: &FieldState,
        states: &[QuadraturePointState],
    ) -> io::Result<PathBuf> {
        let path = self.dir.join(format!("fields_{tag}.vtk"));
        let mut w = BufWriter::new(File::create(&path)?);
        write_vtk(&mut w, disc, fields, states, &format!("fields at {tag}"))?;
        w.flush()?;
        Ok(path)
    }

    pub fn write_summary(&mut self, metrics: &RunMetrics, config: &Config) -> io::Result<()> {
        #[derive(Serialize)]
        struct Summary<'a> {
            status: &'a str,
            failed: bool,
            n_f: Option<f64>,
            aborted: Option<&'a str>,
            peak_force: f64,
            increments: usize,
            final_time: f64,
            final_crack_extension: f64,
            total_iterations: usize,
            total_cutbacks: usize,
            config: &'a Config,
        }
        let status = if metrics.aborted.is_some() {
            "aborted"
        } else if metrics.failed {
            "failed"
        } else {
            "completed"
        };
        let last = metrics.records.last();
        let summary = Summary {
            status,
            failed: metrics.failed,
            n_f: metrics.n_f,
            aborted: metrics.aborted.as_deref(),
            peak_force: metrics.peak_force,
            increments: metrics.records.len(),
            final_time: last.map_or(0.0, |r| r.time),
            final_crack_extension: last.map_or(0.0, |r| r.crack_extension),
            total_iterations: metrics.total_iterations,
            total_cutbacks: metrics.total_cutbacks,
            config,
        };
        let text = serde_json::to_string_pretty(&summary).map_err(io::Error::other)?;
        std::fs::write(self.dir.join("summary.json"), text + "\n")
    }
}

fn cell_average(states: &[QuadraturePointState], per_element: usize, value: impl Fn(&QuadraturePointState) -> f64) -> Vec<f64> {
    states
        .chunks(per_element)
        .map(|c| c.iter().map(&value).sum::<f64>() / c.len() as f64)
        .collect()
}

/// Legacy ASCII VTK unstructured grid with point data `u`, `phi` and
/// cell-averaged `plastic_work`, `history` and `theta_bar`.
pub fn write_vtk(
    w: &mut impl Write,
    disc: &Discretization,
    fields: &FieldState,
    states: &[QuadraturePointState],
    title: &str,
) -> io::Result<()> {
    let mesh = &disc.mesh;
    let (n, ne) = (mesh.n_nodes(), mesh.n_elements());
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.replace('\n', " "))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for p in &mesh.nodes {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    let npe = mesh.kind.n_nodes();
    writeln!(w, "CELLS {ne} {}", ne * (npe + 1))?;
    for conn in &mesh.elements {
        write!(w, "{npe}")?;
        for c in conn {
            write!(w, " {c}")?;
        }
        writeln!(w)?;
    }
    let cell_type = match mesh.kind {
        ElementKind::Quad4 => 9,
        ElementKind::Tri3 => 5,
    };
    writeln!(w, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(w, "{cell_type}")?;
    }
    writeln!(w, "POINT_DATA {n}")?;
    writeln!(w, "VECTORS u double")?;
    for a in 0..n {
        writeln!(w, "{} {} 0", fields.u[2 * a], fields.u[2 * a + 1])?;
    }
    writeln!(w, "SCALARS phi double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in &fields.phi {
        writeln!(w, "{p}")?;
    }
    writeln!(w, "CELL_DATA {ne}")?;
    let npts = disc.points_per_element;
    let channels: [(&str, Vec<f64>); 3] = [
        ("plastic_work", cell_average(states, npts, |s| s.plastic.plastic_work)),
        ("history", cell_average(states, npts, |s| s.history)),
        ("theta_bar", cell_average(states, npts, |s| s.fatigue.accumulated)),
    ];
    for (name, values) in channels {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in values {
            writeln!(w, "{v}")?;
        }
    }
    Ok(())
}
