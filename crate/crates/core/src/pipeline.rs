//! Scene-level stages: plan, simulate, export. Each stage writes its
//! artifacts into an output directory and stamps them with the config hash.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{simulate_mission, ControlError, MissionLog, MissionSummary};
use crate::exec::Execution;
use crate::formation::{compose, VehiclePair};
use crate::geometry::{write_obj, TriMesh};
use crate::planner::{
    decompose_path, densify, plan, simplify, PlanDocument, PlanError, PlanRequest, PlanTiming,
    SimplifyParams,
};
use crate::scene::{LoadedScene, SceneError};
use crate::trajectory::{fit_trajectory_with_durations, shared_durations, TrajectoryError};
use crate::vbody::body_for_state;

pub const PLAN_FILE: &str = "plan.json";
pub const TIMING_FILE: &str = "timing.json";
pub const MISSION_FILE: &str = "mission.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("plan was made for config {plan}, but the config hashes to {config}; re-run `plan`")]
    HashMismatch { plan: String, config: String },
    #[error("{path}: {message}")]
    BadPlan { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit code: 2 config, 3 no path, 4 execution failure, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Scene(_) | PipelineError::HashMismatch { .. } | PipelineError::BadPlan { .. } => 2,
            PipelineError::Plan(PlanError::NoPathFound { .. }) => 3,
            PipelineError::Plan(_) => 2,
            PipelineError::Control(ControlError::CollisionDuringExecution { .. })
            | PipelineError::Control(ControlError::DivergenceDetected { .. }) => 4,
            PipelineError::Control(ControlError::InvalidConfig(_)) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, bytes).map_err(io_err(path))
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn points_csv(points: &[[f64; 3]]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "z"]).expect("in memory");
    for p in points {
        w.serialize(p).expect("in memory");
    }
    w.into_inner().expect("in memory")
}

fn obj_bytes(mesh: &TriMesh) -> Vec<u8> {
    let mut out = Vec::new();
    write_obj(mesh, &mut out).expect("in memory");
    out
}

#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub document: PlanDocument,
    pub timing: PlanTiming,
}

/// Plans and simplifies the scene's formation path.
pub fn run_plan(scene: &LoadedScene, exec: Execution) -> Result<PlanOutput, PipelineError> {
    let cfg = &scene.config;
    let hash = scene.config_hash();
    let req = PlanRequest {
        start: cfg.start,
        goal: cfg.goal,
        bounds: cfg.bounds,
        environment: &scene.environment,
        vbody_cfg: cfg.planning_body(),
        rope_length: cfg.rope_length,
        rng_seed: cfg.rng_seed,
        params: cfg.planner,
    };
    let t0 = Instant::now();
    let result = plan(&req, exec)?;
    let plan_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let validator = req.validator(exec);
    let simplified = simplify(&result.path, &validator, &SimplifyParams::from(&cfg.planner), cfg.rng_seed);
    let simplify_s = t1.elapsed().as_secs_f64();

    let w = cfg.planner.weights;
    let document = PlanDocument::new(
        hash.clone(),
        cfg.rng_seed,
        cfg.rope_length,
        &simplified,
        result.path.length(&w),
        simplified.length(&w),
        result.stats,
    );
    let checks = result.validity_checks + validator.checks();
    let timing = PlanTiming {
        config_hash: hash,
        load_s: scene.load_s,
        plan_s,
        simplify_s,
        total_s: scene.load_s + plan_s + simplify_s,
        validity_checks: checks,
        mean_check_us: if checks > 0 { 1e6 * (plan_s + simplify_s) / checks as f64 } else { 0.0 },
        environment_triangles: scene.environment.triangle_count(),
    };
    Ok(PlanOutput { document, timing })
}

/// Writes the plan, the waypoint lists, the timing report and one body mesh
/// per path state.
pub fn write_plan(out: &Path, scene: &LoadedScene, output: &PlanOutput) -> Result<(), PipelineError> {
    let doc = &output.document;
    write_file(&out.join(PLAN_FILE), doc.to_json().as_bytes())?;
    write_file(&out.join(TIMING_FILE), &json(&output.timing))?;
    write_file(&out.join("waypoints_uav1.csv"), &points_csv(&doc.waypoints_uav1))?;
    write_file(&out.join("waypoints_uav2.csv"), &points_csv(&doc.waypoints_uav2))?;
    let cfg = &scene.config;
    for (i, s) in doc.states.iter().enumerate() {
        let body = body_for_state(s, cfg.rope_length, &cfg.vbody).map_err(|e| PipelineError::BadPlan {
            path: out.join(PLAN_FILE),
            message: format!("state {i}: {e}"),
        })?;
        write_file(&out.join("bodies").join(format!("state_{i:04}.obj")), &obj_bytes(&body.mesh))?;
    }
    Ok(())
}

pub fn read_plan(path: &Path) -> Result<PlanDocument, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    PlanDocument::from_json(&text).map_err(|e| PipelineError::BadPlan {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Refuses plans made for a different config.
pub fn check_hash(scene: &LoadedScene, doc: &PlanDocument) -> Result<(), PipelineError> {
    let config = scene.config_hash();
    if doc.config_hash != config {
        return Err(PipelineError::HashMismatch {
            plan: doc.config_hash.clone(),
            config,
        });
    }
    Ok(())
}

/// Per-vehicle waypoints the simulator flies: the plan densified in
/// formation space, then split.
pub fn execution_waypoints(scene: &LoadedScene, doc: &PlanDocument) -> (Vec<Point3<f64>>, Vec<Point3<f64>>) {
    decompose_path(&densify(&doc.path(), scene.config.waypoint_spacing))
}

/// Outcome of the simulate stage as written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config_hash: String,
    pub status: String,
    pub failed_tick: Option<usize>,
    pub safety_dx: f64,
    #[serde(flatten)]
    pub mission: MissionSummary,
}

/// Runs the mission for `doc`. The log is returned together with the error
/// when execution fails, so it can still be written.
pub fn run_simulate(
    scene: &LoadedScene,
    doc: &PlanDocument,
    exec: Execution,
) -> Result<(MissionLog, Option<PipelineError>), PipelineError> {
    check_hash(scene, doc)?;
    if doc.states.len() < 2 {
        return Err(PipelineError::BadPlan {
            path: PathBuf::from(PLAN_FILE),
            message: "plan has a single state; nothing to fly".into(),
        });
    }
    let (w1, w2) = execution_waypoints(scene, doc);
    let cfg = scene.config.mission_config();
    match simulate_mission(&w1, &w2, &scene.environment, scene.config.rope_length, &cfg, exec) {
        Ok(log) => Ok((log, None)),
        Err(ControlError::CollisionDuringExecution { tick, log }) => {
            let log = *log;
            let err = ControlError::CollisionDuringExecution {
                tick,
                log: Box::new(log.clone()),
            };
            Ok((log, Some(err.into())))
        }
        Err(ControlError::DivergenceDetected { tick, error, log }) => {
            let log = *log;
            let err = ControlError::DivergenceDetected {
                tick,
                error,
                log: Box::new(log.clone()),
            };
            Ok((log, Some(err.into())))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn simulation_report(scene: &LoadedScene, log: &MissionLog, failure: Option<&PipelineError>) -> SimulationReport {
    let (status, failed_tick) = match failure {
        Some(PipelineError::Control(ControlError::CollisionDuringExecution { tick, .. })) => ("collision", Some(*tick)),
        Some(PipelineError::Control(ControlError::DivergenceDetected { tick, .. })) => ("divergence", Some(*tick)),
        Some(_) => ("error", None),
        None => ("ok", None),
    };
    SimulationReport {
        config_hash: scene.config_hash(),
        status: status.into(),
        failed_tick,
        safety_dx: scene.config.vbody.safety_dx,
        mission: log.summary(),
    }
}

pub fn write_simulation(out: &Path, log: &MissionLog, report: &SimulationReport) -> Result<(), PipelineError> {
    write_file(&out.join(MISSION_FILE), log.to_csv().as_bytes())?;
    write_file(&out.join(SUMMARY_FILE), &json(report))
}

/// Everything `run` produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub plan: PlanOutput,
    pub log: MissionLog,
    pub report: SimulationReport,
}

/// Plan, write, simulate, write. On an execution failure the artifacts are
/// still written before the error is returned.
pub fn run_all(scene: &LoadedScene, out: &Path, exec: Execution) -> Result<RunOutput, PipelineError> {
    let plan_out = run_plan(scene, exec)?;
    write_plan(out, scene, &plan_out)?;
    let (log, failure) = run_simulate(scene, &plan_out.document, exec)?;
    let report = simulation_report(scene, &log, failure.as_ref());
    write_simulation(out, &log, &report)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(RunOutput {
            plan: plan_out,
            log,
            report,
        }),
    }
}

/// Writes the obstacles and the desired formation's body every `stride`
/// ticks of the synchronized trajectories, with an index of frame times.
/// Returns the number of frames.
pub fn export_bodies(scene: &LoadedScene, doc: &PlanDocument, out: &Path, stride: usize) -> Result<usize, PipelineError> {
    check_hash(scene, doc)?;
    let stride = stride.max(1);
    let mut obstacles = TriMesh::default();
    for m in &scene.meshes {
        obstacles.append(m);
    }
    write_file(&out.join("obstacles.obj"), &obj_bytes(&obstacles))?;

    let (w1, w2) = execution_waypoints(scene, doc);
    let cfg = scene.config.mission_config();
    let durations = shared_durations(&w1, &w2, cfg.speed);
    let tr1 = fit_trajectory_with_durations(&w1, &durations)?;
    let tr2 = fit_trajectory_with_durations(&w2, &durations)?;
    let dt = cfg.mpc.dt;
    let ticks = (tr1.duration() / dt).ceil() as usize;
    let mut index = String::from("frame,tick,time,file\n");
    let mut frames = 0;
    for tick in (0..=ticks).step_by(stride) {
        let t = (tick as f64 * dt).min(tr1.duration());
        let pair = VehiclePair {
            p1: tr1.evaluate_clamped(t),
            p2: tr2.evaluate_clamped(t),
        };
        let Ok(state) = compose(&pair) else { continue };
        let Ok(body) = body_for_state(&state, scene.config.rope_length, &scene.config.vbody) else {
            continue;
        };
        let name = format!("frame_{frames:05}.obj");
        write_file(&out.join(&name), &obj_bytes(&body.mesh))?;
        index.push_str(&format!("{frames},{tick},{t},{name}\n"));
        frames += 1;
    }
    let idx = out.join("frames.csv");
    let mut f = std::fs::File::create(&idx).map_err(io_err(&idx))?;
    f.write_all(index.as_bytes()).map_err(io_err(&idx))?;
    Ok(frames)
}
