//! Simulation input file: TOML with the sections `[mesh]`, `[material]`,
//! `[fracture]`, `[fatigue]`, `[load]`, `[solver]` and `[output]`.
//!
//! Units are N, mm and MPa throughout. Unknown keys are rejected. After
//! parsing, every default is written back into the structure so that
//! [`Config::to_toml`] produces a complete echo of what was run.

use crate::assembly::Materials;
use crate::fatigue::{default_threshold, FatigueKind, FatigueLaw};
use crate::fracture::{FractureError, FractureKind, FractureModel};
use crate::load::LoadProgram;
use crate::mesh::{self, DirichletBc, Mesh, MeshError};
use crate::plasticity::{Backstress, PlasticityError, PlasticityParams};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_RESIDUAL_STIFFNESS: f64 = 1e-7;
pub const DEFAULT_PHASE_THRESHOLD: f64 = 0.9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid TOML: {0}")]
    Syntax(String),
    #[error("`{key}`: {message}")]
    Schema { key: String, message: String },
    #[error("`{key}` {reason}")]
    Invalid { key: String, reason: String },
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub mesh: MeshConfig,
    pub material: MaterialConfig,
    pub fracture: FractureConfig,
    #[serde(default)]
    pub fatigue: FatigueConfig,
    pub load: LoadConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Geometry source: a built-in generator or a mesh file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshConfig {
    Rectangle {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    },
    /// Edge slot from the left at mid-height; see [`mesh::edge_notched_mesh`].
    EdgeNotched {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
        notch_length: f64,
    },
    DoubleNotched {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
        notch_length: f64,
        left_y: f64,
        right_y: f64,
    },
    /// Native mesh file; relative paths are resolved against the config file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub young: f64,
    pub poisson: f64,
    pub yield_stress: f64,
    #[serde(default)]
    pub q_inf: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub backstresses: Vec<Backstress>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractureConfig {
    pub model: FractureKind,
    pub toughness: f64,
    pub length_scale: f64,
    /// PF-CZM only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_stiffness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FatigueConfig {
    #[serde(default = "default_law")]
    pub law: FatigueKind,
    /// Logarithmic law only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Explicit ϑ_T [MPa]; derived from G_c and ℓ when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

fn default_law() -> FatigueKind {
    FatigueKind::Asymptotic
}

impl Default for FatigueConfig {
    fn default() -> Self {
        Self {
            law: FatigueKind::Asymptotic,
            kappa: None,
            threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    /// Maximum applied displacement [mm].
    pub amplitude: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    pub increments_per_cycle: usize,
    pub cycles: usize,
    /// Prescribed displacements; driven entries follow `scale · signal(t)`.
    pub boundary: Vec<DirichletBc>,
}

fn default_ratio() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    /// Cycle counts at which field snapshots are written.
    #[serde(default)]
    pub snapshot_cycles: Vec<usize>,
    /// Node set watched for failure; the whole mesh when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_set: Option<String>,
    #[serde(default = "default_phase_threshold")]
    pub failure_threshold: f64,
    /// Polyline along which the crack extension is measured, starting at the
    /// crack origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crack_path: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_phase_threshold")]
    pub crack_threshold: f64,
}

fn default_phase_threshold() -> f64 {
    DEFAULT_PHASE_THRESHOLD
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            snapshot_cycles: Vec::new(),
            failure_set: None,
            failure_threshold: DEFAULT_PHASE_THRESHOLD,
            crack_path: None,
            crack_threshold: DEFAULT_PHASE_THRESHOLD,
        }
    }
}

impl Config {
    /// Parses, validates and fills defaults. Mesh file paths stay as written.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let mut config: Config = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
            key: e.path().to_string(),
            message: e.inner().message().to_string(),
        })?;
        config.fill_defaults();
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; a relative mesh path is made relative to the
    /// directory holding the config.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::parse(&text)?;
        if let MeshConfig::File { path: mesh_path } = &mut config.mesh {
            if mesh_path.is_relative() {
                if let Some(dir) = path.parent() {
                    *mesh_path = dir.join(&*mesh_path);
                }
            }
        }
        Ok(config)
    }

    /// Complete echo of the configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    fn fill_defaults(&mut self) {
        let f = &mut self.fracture;
        f.residual_stiffness.get_or_insert(DEFAULT_RESIDUAL_STIFFNESS);
        if self.fatigue.law != FatigueKind::None && f.toughness > 0.0 && f.length_scale > 0.0 {
            self.fatigue
                .threshold
                .get_or_insert(default_threshold(f.toughness, f.length_scale));
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_mesh()?;
        self.materials()?;
        self.load_program()?;
        if self.load.boundary.is_empty() {
            return Err(invalid("load.boundary", "needs at least one entry"));
        }
        if self.load.boundary.iter().all(|b| b.is_fixed()) {
            log::warn!("no boundary entry is driven by the load signal");
        }
        let s = &self.solver;
        if !(s.tol_residual > 0.0 && s.tol_residual < 1.0) {
            return Err(invalid("solver.tol_residual", "must lie in (0, 1)"));
        }
        if !(s.tol_correction > 0.0 && s.tol_correction < 1.0) {
            return Err(invalid("solver.tol_correction", "must lie in (0, 1)"));
        }
        if s.max_iterations == 0 {
            return Err(invalid("solver.max_iterations", "must be >= 1"));
        }
        let o = &self.output;
        for (key, v) in [("output.failure_threshold", o.failure_threshold), ("output.crack_threshold", o.crack_threshold)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(key, "must lie in (0, 1]"));
            }
        }
        if let Some(path) = &o.crack_path {
            if path.len() < 2 {
                return Err(invalid("output.crack_path", "needs at least two points"));
            }
            if path.iter().flatten().any(|v| !v.is_finite()) {
                return Err(invalid("output.crack_path", "must be finite"));
            }
        }
        Ok(())
    }

    fn validate_mesh(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(&format!("mesh.{key}"), "must be > 0"))
            }
        };
        let counts = |nx: usize, ny: usize| {
            if nx == 0 {
                Err(invalid("mesh.nx", "must be >= 1"))
            } else if ny == 0 {
                Err(invalid("mesh.ny", "must be >= 1"))
            } else {
                Ok(())
            }
        };
        match &self.mesh {
            MeshConfig::Rectangle { width, height, nx, ny } => {
                positive("width", *width)?;
                positive("height", *height)?;
                counts(*nx, *ny)
            }
            MeshConfig::EdgeNotched {
                width,
                height,
                nx,
                ny,
                notch_length,
            } => {
                positive("width", *width)?;
                positive("height", *height)?;
                positive("notch_length", *notch_length)?;
                counts(*nx, *ny)?;
                if ny % 2 != 0 || *ny < 4 {
                    return Err(invalid("mesh.ny", "must be even and >= 4 for an edge-notched plate"));
                }
                if notch_length >= width {
                    return Err(invalid("mesh.notch_length", "must be smaller than the width"));
                }
                Ok(())
            }
            MeshConfig::DoubleNotched {
                width,
                height,
                nx,
                ny,
                notch_length,
                left_y,
                right_y,
            } => {
                positive("width", *width)?;
                positive("height", *height)?;
                positive("notch_length", *notch_length)?;
                counts(*nx, *ny)?;
                if 2.0 * notch_length >= *width {
                    return Err(invalid("mesh.notch_length", "the two notches overlap"));
                }
                for (key, y) in [("mesh.left_y", *left_y), ("mesh.right_y", *right_y)] {
                    if !(y > 0.0 && y < *height) {
                        return Err(invalid(key, "must lie inside the plate"));
                    }
                }
                Ok(())
            }
            MeshConfig::File { .. } => Ok(()),
        }
    }

    /// Builds the mesh described by `[mesh]` and checks the node sets the
    /// rest of the configuration refers to.
    pub fn build_mesh(&self) -> Result<Mesh, ConfigError> {
        let mesh = match &self.mesh {
            MeshConfig::Rectangle { width, height, nx, ny } => mesh::structured_rect_mesh(*width, *height, *nx, *ny)?,
            MeshConfig::EdgeNotched {
                width,
                height,
                nx,
                ny,
                notch_length,
            } => mesh::edge_notched_mesh(*width, *height, *nx, *ny, *notch_length)?,
            MeshConfig::DoubleNotched {
                width,
                height,
                nx,
                ny,
                notch_length,
                left_y,
                right_y,
            } => mesh::double_notched_mesh(*width, *height, *nx, *ny, *notch_length, *left_y, *right_y)?,
            MeshConfig::File { path } => mesh::load_mesh(path)?,
        };
        for (i, bc) in self.load.boundary.iter().enumerate() {
            if mesh.node_set(&bc.set).is_err() {
                return Err(invalid(&format!("load.boundary[{i}].set"), format!("unknown node set `{}`", bc.set)));
            }
        }
        if let Some(set) = &self.output.failure_set {
            if mesh.node_set(set).is_err() {
                return Err(invalid("output.failure_set", format!("unknown node set `{set}`")));
            }
        }
        Ok(mesh)
    }

    pub fn materials(&self) -> Result<Materials, ConfigError> {
        let m = &self.material;
        let plasticity = PlasticityParams::new(m.young, m.poisson, m.yield_stress, m.q_inf, m.b, m.backstresses.clone())
            .map_err(|e| match e {
                PlasticityError::InvalidParameter { name, reason } => invalid(&format!("material.{name}"), reason),
                other => invalid("material", other.to_string()),
            })?;
        let f = &self.fracture;
        let fracture = FractureModel::new(f.model, f.toughness, f.length_scale, m.young, f.strength).map_err(|e| match e {
            FractureError::InvalidParameter { name, reason } => {
                let section = if name == "young" { "material" } else { "fracture" };
                invalid(&format!("{section}.{name}"), reason)
            }
            other => invalid("fracture", other.to_string()),
        })?;
        let kappa = f.residual_stiffness.unwrap_or(DEFAULT_RESIDUAL_STIFFNESS);
        if !(kappa >= 0.0 && kappa < 1.0) {
            return Err(invalid("fracture.residual_stiffness", "must lie in [0, 1)"));
        }
        let fracture = fracture.with_residual_stiffness(kappa);

        let fc = &self.fatigue;
        let threshold = fc.threshold.unwrap_or_else(|| default_threshold(f.toughness, f.length_scale));
        if fc.law != FatigueKind::None && !(threshold > 0.0 && threshold.is_finite()) {
            return Err(invalid("fatigue.threshold", "must be > 0"));
        }
        let fatigue = match (fc.law, fc.kappa) {
            (FatigueKind::Asymptotic, None) => FatigueLaw::asymptotic(threshold),
            (FatigueKind::Logarithmic, Some(k)) if k > 0.0 && k.is_finite() => FatigueLaw::logarithmic(threshold, k),
            (FatigueKind::Logarithmic, Some(_)) => return Err(invalid("fatigue.kappa", "must be > 0")),
            (FatigueKind::Logarithmic, None) => return Err(invalid("fatigue.kappa", "is required by the logarithmic law")),
            (FatigueKind::None, None) => {
                if fc.threshold.is_some() {
                    return Err(invalid("fatigue.threshold", "is meaningless without a fatigue law"));
                }
                FatigueLaw::none()
            }
            (_, Some(_)) => return Err(invalid("fatigue.kappa", "only applies to the logarithmic law")),
        };
        Ok(Materials {
            plasticity,
            fracture,
            fatigue,
        })
    }

    pub fn load_program(&self) -> Result<LoadProgram, ConfigError> {
        let l = &self.load;
        let program = LoadProgram {
            amplitude: l.amplitude,
            ratio: l.ratio,
            increments_per_cycle: l.increments_per_cycle,
            cycles: l.cycles,
        };
        program
            .validate()
            .map_err(|(key, reason)| invalid(&format!("load.{key}"), reason))?;
        Ok(program)
    }
}
