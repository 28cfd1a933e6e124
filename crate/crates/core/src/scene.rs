//! Scene files: obstacle meshes with placements, the planning problem and
//! every tunable, as one JSON document.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{Isometry3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::control::MissionConfig;
use crate::formation::FormationState;
use crate::geometry::{load_stl, GeometryError, TriMesh};
use crate::planner::{Environment, PlannerParams, StateSpaceBounds};
use crate::vbody::VBodyConfig;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Mesh {
        path: PathBuf,
        source: GeometryError,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

/// One obstacle: a mesh file (relative to the scene file) and its placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleEntry {
    pub mesh: PathBuf,
    #[serde(default)]
    pub translation: [f64; 3],
    /// Roll, pitch, yaw (rad), applied in that order.
    #[serde(default)]
    pub rotation_rpy: [f64; 3],
}

impl ObstacleEntry {
    pub fn placement(&self) -> Isometry3<f64> {
        let [r, p, y] = self.rotation_rpy;
        Isometry3::from_parts(
            Translation3::from(nalgebra::Vector3::from(self.translation)),
            UnitQuaternion::from_euler_angles(r, p, y),
        )
    }
}

fn default_planning_margin() -> f64 {
    0.05
}

fn default_spacing() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub name: String,
    #[serde(default)]
    pub obstacles: Vec<ObstacleEntry>,
    pub rope_length: f64,
    pub bounds: StateSpaceBounds,
    pub start: FormationState,
    pub goal: FormationState,
    /// Body used for execution checks and exports.
    #[serde(default)]
    pub vbody: VBodyConfig,
    /// Clearance added to the body while planning, to absorb tracking error.
    #[serde(default = "default_planning_margin")]
    pub planning_margin: f64,
    #[serde(default)]
    pub planner: PlannerParams,
    #[serde(default)]
    pub mission: MissionConfig,
    /// Largest vehicle step (m) between execution waypoints.
    #[serde(default = "default_spacing")]
    pub waypoint_spacing: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Relative to the scene file. Not part of the config hash.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl SceneConfig {
    pub fn planning_body(&self) -> VBodyConfig {
        VBodyConfig {
            margin: self.vbody.margin + self.planning_margin,
            ..self.vbody
        }
    }

    pub fn mission_config(&self) -> MissionConfig {
        MissionConfig {
            vbody: self.vbody,
            ..self.mission.clone()
        }
    }

    fn check(&self) -> Result<(), String> {
        if !(self.rope_length > 0.0 && self.rope_length.is_finite()) {
            return Err("rope_length must be positive".into());
        }
        if !(self.planning_margin >= 0.0) {
            return Err("planning_margin must be non-negative".into());
        }
        if !(self.waypoint_spacing > 0.0) {
            return Err("waypoint_spacing must be positive".into());
        }
        if !(self.mission.speed > 0.0) {
            return Err("mission.speed must be positive".into());
        }
        self.bounds.validate(self.rope_length).map_err(|e| e.to_string())?;
        self.vbody.validate().map_err(|e| e.to_string())?;
        self.planner.validate().map_err(|e| e.to_string())?;
        self.mission.mpc.validate().map_err(|e| e.to_string())?;
        for (label, s) in [("start", &self.start), ("goal", &self.goal)] {
            if !s.is_well_formed(self.rope_length) {
                return Err(format!("{label} state is malformed for rope length {}", self.rope_length));
            }
            if !self.bounds.contains(s) {
                return Err(format!("{label} state lies outside the bounds"));
            }
        }
        Ok(())
    }
}

/// A parsed scene with its meshes loaded and placed.
#[derive(Debug, Clone)]
pub struct LoadedScene {
    pub path: PathBuf,
    pub config: SceneConfig,
    pub meshes: Vec<TriMesh>,
    pub environment: Environment,
    /// SHA-256 digests of the mesh files, in obstacle order.
    pub mesh_digests: Vec<String>,
    pub load_s: f64,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl LoadedScene {
    pub fn base_dir(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    /// Output directory from the config, relative to the scene file.
    pub fn output_dir(&self) -> Option<PathBuf> {
        self.config.output_dir.as_ref().map(|d| self.base_dir().join(d))
    }

    /// Digest of the canonical config JSON (sorted keys, output directory
    /// removed) followed by the mesh file digests.
    pub fn config_hash(&self) -> String {
        let mut cfg = self.config.clone();
        cfg.output_dir = None;
        let canonical = serde_json::to_value(&cfg).expect("config serializes").to_string();
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        for d in &self.mesh_digests {
            h.update(d.as_bytes());
        }
        hex(&h.finalize())
    }

    /// Checks the config and rebuilds the environment. Call after editing
    /// `config` in place.
    pub fn revalidate(&self) -> Result<(), SceneError> {
        self.config.check().map_err(|message| SceneError::Invalid {
            path: self.path.clone(),
            message,
        })
    }
}

pub fn parse_scene(text: &str, path: &Path) -> Result<SceneConfig, SceneError> {
    serde_json::from_str(text).map_err(|e| SceneError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<LoadedScene, SceneError> {
    let t0 = Instant::now();
    let path = path.as_ref().to_path_buf();
    let text = std::fs::read_to_string(&path).map_err(|source| SceneError::Io {
        path: path.clone(),
        source,
    })?;
    let config = parse_scene(&text, &path)?;
    config.check().map_err(|message| SceneError::Invalid {
        path: path.clone(),
        message,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut meshes = Vec::with_capacity(config.obstacles.len());
    let mut mesh_digests = Vec::with_capacity(config.obstacles.len());
    for entry in &config.obstacles {
        let file = base.join(&entry.mesh);
        let bytes = std::fs::read(&file).map_err(|source| SceneError::Io {
            path: file.clone(),
            source,
        })?;
        let loaded = load_stl(&bytes).map_err(|source| SceneError::Mesh {
            path: file.clone(),
            source,
        })?;
        if loaded.mesh.is_empty() {
            return Err(SceneError::Mesh {
                path: file,
                source: GeometryError::EmptyMesh,
            });
        }
        mesh_digests.push(hex(&Sha256::digest(&bytes)));
        meshes.push(loaded.mesh.transformed(&entry.placement()));
    }
    let environment = Environment::from_meshes(meshes.clone()).map_err(|source| SceneError::Mesh {
        path: path.clone(),
        source,
    })?;
    Ok(LoadedScene {
        path,
        config,
        meshes,
        environment,
        mesh_digests,
        load_s: t0.elapsed().as_secs_f64(),
    })
}
