use nalgebra::{Point3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{step_dynamics, ControlError, ControlInput, MpcConfig, MpcController, QuadState};
use crate::exec::Execution;
use crate::formation::{angle_diff, compose, FormationState, VehiclePair};
use crate::planner::{is_state_valid, Environment};
use crate::trajectory::{fit_trajectory_with_durations, shared_durations, PiecewiseTrajectory, SyncFollowerState};
use crate::vbody::VBodyConfig;

/// Seeded white acceleration noise added to both vehicles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    /// Standard deviation per axis (m/s²).
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionConfig {
    pub mpc: MpcConfig,
    /// Body used for the execution-time collision flag. Scenes set it from
    /// their own body config, so it is not read from JSON.
    #[serde(skip)]
    pub vbody: VBodyConfig,
    /// Cruise speed used to time the trajectory segments (m/s).
    pub speed: f64,
    /// Longest hold after the trajectory ends (s).
    pub tail_time: f64,
    /// The hold ends early once both vehicles are this close to their goal.
    pub settle_tol: f64,
    /// Abort when either vehicle is farther than this from its reference.
    pub abort_error: f64,
    pub stop_on_collision: bool,
    pub disturbance: Option<Disturbance>,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            mpc: MpcConfig::default(),
            vbody: VBodyConfig::default(),
            speed: 0.3,
            tail_time: 5.0,
            settle_tol: 0.005,
            abort_error: 0.5,
            stop_on_collision: true,
            disturbance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: usize,
    pub time: f64,
    /// Leader time recovered by the follower.
    pub follower_time: f64,
    pub x1: QuadState,
    pub x2: QuadState,
    pub u1: ControlInput,
    pub u2: ControlInput,
    pub wp1: Point3<f64>,
    pub wp2: Point3<f64>,
    pub desired: Option<FormationState>,
    pub measured: Option<FormationState>,
    pub err1: f64,
    pub err2: f64,
    pub collision: bool,
    pub stalled1: bool,
    pub stalled2: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSummary {
    pub ticks: usize,
    pub trajectory_duration: f64,
    pub executed_duration: f64,
    pub max_tracking_error: f64,
    pub final_error_uav1: f64,
    pub final_error_uav2: f64,
    pub max_d_error: f64,
    pub max_yaw_error: f64,
    pub max_theta_error: f64,
    pub collision_count: usize,
    pub stalled_solves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionLog {
    pub dt: f64,
    pub trajectory_duration: f64,
    pub goal1: Point3<f64>,
    pub goal2: Point3<f64>,
    pub records: Vec<TickRecord>,
}

#[derive(Serialize)]
struct CsvRow {
    tick: usize,
    time: f64,
    follower_time: f64,
    x1: f64,
    y1: f64,
    z1: f64,
    vx1: f64,
    vy1: f64,
    vz1: f64,
    roll1: f64,
    pitch1: f64,
    thrust1: f64,
    roll_ref1: f64,
    pitch_ref1: f64,
    x2: f64,
    y2: f64,
    z2: f64,
    vx2: f64,
    vy2: f64,
    vz2: f64,
    roll2: f64,
    pitch2: f64,
    thrust2: f64,
    roll_ref2: f64,
    pitch_ref2: f64,
    wp1_x: f64,
    wp1_y: f64,
    wp1_z: f64,
    wp2_x: f64,
    wp2_y: f64,
    wp2_z: f64,
    des_x: Option<f64>,
    des_y: Option<f64>,
    des_z: Option<f64>,
    des_yaw: Option<f64>,
    des_d: Option<f64>,
    des_theta: Option<f64>,
    meas_x: Option<f64>,
    meas_y: Option<f64>,
    meas_z: Option<f64>,
    meas_yaw: Option<f64>,
    meas_d: Option<f64>,
    meas_theta: Option<f64>,
    err1: f64,
    err2: f64,
    collision: u8,
    stalled1: u8,
    stalled2: u8,
}

impl From<&TickRecord> for CsvRow {
    fn from(r: &TickRecord) -> Self {
        let f = |s: &Option<FormationState>, i: usize| s.map(|s| s.to_array()[i]);
        Self {
            tick: r.tick,
            time: r.time,
            follower_time: r.follower_time,
            x1: r.x1.p.x,
            y1: r.x1.p.y,
            z1: r.x1.p.z,
            vx1: r.x1.v.x,
            vy1: r.x1.v.y,
            vz1: r.x1.v.z,
            roll1: r.x1.phi,
            pitch1: r.x1.theta,
            thrust1: r.u1.thrust,
            roll_ref1: r.u1.phi_ref,
            pitch_ref1: r.u1.theta_ref,
            x2: r.x2.p.x,
            y2: r.x2.p.y,
            z2: r.x2.p.z,
            vx2: r.x2.v.x,
            vy2: r.x2.v.y,
            vz2: r.x2.v.z,
            roll2: r.x2.phi,
            pitch2: r.x2.theta,
            thrust2: r.u2.thrust,
            roll_ref2: r.u2.phi_ref,
            pitch_ref2: r.u2.theta_ref,
            wp1_x: r.wp1.x,
            wp1_y: r.wp1.y,
            wp1_z: r.wp1.z,
            wp2_x: r.wp2.x,
            wp2_y: r.wp2.y,
            wp2_z: r.wp2.z,
            des_x: f(&r.desired, 0),
            des_y: f(&r.desired, 1),
            des_z: f(&r.desired, 2),
            des_yaw: f(&r.desired, 3),
            des_d: f(&r.desired, 4),
            des_theta: f(&r.desired, 5),
            meas_x: f(&r.measured, 0),
            meas_y: f(&r.measured, 1),
            meas_z: f(&r.measured, 2),
            meas_yaw: f(&r.measured, 3),
            meas_d: f(&r.measured, 4),
            meas_theta: f(&r.measured, 5),
            err1: r.err1,
            err2: r.err2,
            collision: r.collision as u8,
            stalled1: r.stalled1 as u8,
            stalled2: r.stalled2 as u8,
        }
    }
}

impl MissionLog {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(CsvRow::from(r))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn summary(&self) -> MissionSummary {
        let mut s = MissionSummary {
            ticks: self.records.len(),
            trajectory_duration: self.trajectory_duration,
            executed_duration: self.records.last().map_or(0.0, |r| r.time),
            max_tracking_error: 0.0,
            final_error_uav1: 0.0,
            final_error_uav2: 0.0,
            max_d_error: 0.0,
            max_yaw_error: 0.0,
            max_theta_error: 0.0,
            collision_count: 0,
            stalled_solves: 0,
        };
        for r in &self.records {
            s.max_tracking_error = s.max_tracking_error.max(r.err1).max(r.err2);
            if let (Some(d), Some(m)) = (r.desired, r.measured) {
                s.max_d_error = s.max_d_error.max((d.d - m.d).abs());
                s.max_yaw_error = s.max_yaw_error.max(angle_diff(d.phi_yaw, m.phi_yaw).abs());
                s.max_theta_error = s.max_theta_error.max((d.theta_form - m.theta_form).abs());
            }
            s.collision_count += r.collision as usize;
            s.stalled_solves += r.stalled1 as usize + r.stalled2 as usize;
        }
        if let Some(last) = self.records.last() {
            s.final_error_uav1 = (last.x1.p - self.goal1).norm();
            s.final_error_uav2 = (last.x2.p - self.goal2).norm();
        }
        s
    }
}

/// MPC references for steps `1..=N` starting from trajectory time `t`:
/// position and velocity from the trajectory, level attitude.
fn horizon_refs(tr: &PiecewiseTrajectory, t: f64, cfg: &MpcConfig) -> Vec<QuadState> {
    (1..=cfg.horizon)
        .map(|k| {
            let tk = t + k as f64 * cfg.dt;
            QuadState {
                p: tr.evaluate_clamped(tk),
                v: tr.derivative_clamped(tk, 1),
                phi: 0.0,
                theta: 0.0,
            }
        })
        .collect()
}

/// Flies both vehicles along trajectories through `w1` and `w2`. The leader
/// publishes `tr1` at every tick; the follower recovers the leader's clock
/// from that waypoint alone and tracks `tr2` at the recovered time. After the
/// trajectory ends both hold their final waypoint until settled or
/// `tail_time` runs out.
pub fn simulate_mission(
    w1: &[Point3<f64>],
    w2: &[Point3<f64>],
    env: &Environment,
    rope_length: f64,
    cfg: &MissionConfig,
    exec: Execution,
) -> Result<MissionLog, ControlError> {
    cfg.mpc.validate()?;
    if w1.len() != w2.len() {
        return Err(ControlError::InvalidConfig(format!(
            "waypoint lists differ in length ({} vs {})",
            w1.len(),
            w2.len()
        )));
    }
    let durations = shared_durations(w1, w2, cfg.speed);
    let tr1 = fit_trajectory_with_durations(w1, &durations)?;
    let tr2 = fit_trajectory_with_durations(w2, &durations)?;
    let total = tr1.duration();
    let dt = cfg.mpc.dt;
    let mut sync = SyncFollowerState::new(tr1.clone(), tr2.clone());

    let mut x1 = QuadState::hover_at(w1[0]);
    let mut x2 = QuadState::hover_at(w2[0]);
    let mut mpc1 = MpcController::new(cfg.mpc);
    let mut mpc2 = MpcController::new(cfg.mpc);
    let mut noise = cfg.disturbance.map(|d| {
        (
            ChaCha8Rng::seed_from_u64(d.seed),
            Normal::new(0.0, d.sigma.max(0.0)).expect("finite sigma"),
        )
    });
    let mut log = MissionLog {
        dt,
        trajectory_duration: total,
        goal1: *w1.last().unwrap(),
        goal2: *w2.last().unwrap(),
        records: Vec::new(),
    };

    let last_tick = ((total + cfg.tail_time) / dt).ceil() as usize;
    for tick in 0..=last_tick {
        let time = tick as f64 * dt;
        let wp1 = tr1.evaluate_clamped(time);
        let (t2, wp2) = sync.resolve(&wp1)?;
        let refs1 = horizon_refs(&tr1, time, &cfg.mpc);
        let refs2 = horizon_refs(&tr2, t2, &cfg.mpc);
        let (s1, s2) = exec.join(|| mpc1.step(&x1, &refs1), || mpc2.step(&x2, &refs2));

        let desired = compose(&VehiclePair { p1: wp1, p2: wp2 }).ok();
        let measured = compose(&VehiclePair { p1: x1.p, p2: x2.p }).ok();
        let collision = match measured {
            Some(m) => !is_state_valid(&m, env, rope_length, &cfg.vbody),
            None => true,
        };
        let (err1, err2) = ((x1.p - wp1).norm(), (x2.p - wp2).norm());
        log.records.push(TickRecord {
            tick,
            time,
            follower_time: t2,
            x1,
            x2,
            u1: s1.input,
            u2: s2.input,
            wp1,
            wp2,
            desired,
            measured,
            err1,
            err2,
            collision,
            stalled1: s1.stalled,
            stalled2: s2.stalled,
        });
        if collision && cfg.stop_on_collision {
            return Err(ControlError::CollisionDuringExecution { tick, log: Box::new(log) });
        }
        let error = err1.max(err2);
        if !(error <= cfg.abort_error) || !x1.is_finite() || !x2.is_finite() {
            return Err(ControlError::DivergenceDetected {
                tick,
                error,
                log: Box::new(log),
            });
        }
        if time >= total && error <= cfg.settle_tol {
            break;
        }

        x1 = step_dynamics(&x1, &s1.input, dt, &cfg.mpc);
        x2 = step_dynamics(&x2, &s2.input, dt, &cfg.mpc);
        if let Some((rng, normal)) = noise.as_mut() {
            for x in [&mut x1, &mut x2] {
                let kick = Vector3::from_fn(|_, _| normal.sample(rng));
                x.v += kick * dt;
            }
        }
    }
    Ok(log)
}
