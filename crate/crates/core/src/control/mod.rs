//! Point-mass quadrotor model with first-order attitude lag, an MPC that
//! tracks a reference by projected gradient descent, and the two-vehicle
//! mission simulator.

mod mpc;
mod sim;

use nalgebra::{Point3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mpc::{mpc_cost, mpc_cost_and_gradient, solve_mpc, MpcController, MpcSolution};
pub use sim::{simulate_mission, MissionConfig, MissionLog, MissionSummary, TickRecord};

pub type StateVec = SVector<f64, 8>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("invalid controller config: {0}")]
    InvalidConfig(String),
    #[error("V-body collision at tick {tick}")]
    CollisionDuringExecution { tick: usize, log: Box<MissionLog> },
    #[error("tracking error {error:.3} m at tick {tick} exceeds the abort bound")]
    DivergenceDetected {
        tick: usize,
        error: f64,
        log: Box<MissionLog>,
    },
    #[error(transparent)]
    Trajectory(#[from] crate::trajectory::TrajectoryError),
}

/// `[p, v, φ, θ]` of one vehicle; yaw is fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadState {
    pub p: Point3<f64>,
    pub v: Vector3<f64>,
    pub phi: f64,
    pub theta: f64,
}

impl QuadState {
    pub fn hover_at(p: Point3<f64>) -> Self {
        Self {
            p,
            v: Vector3::zeros(),
            phi: 0.0,
            theta: 0.0,
        }
    }

    pub fn to_vec(&self) -> StateVec {
        StateVec::from_column_slice(&[
            self.p.x, self.p.y, self.p.z, self.v.x, self.v.y, self.v.z, self.phi, self.theta,
        ])
    }

    pub fn from_vec(x: &StateVec) -> Self {
        Self {
            p: Point3::new(x[0], x[1], x[2]),
            v: Vector3::new(x[3], x[4], x[5]),
            phi: x[6],
            theta: x[7],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }
}

/// `[T, φ_ref, θ_ref]`, thrust mass-normalised (m/s²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub thrust: f64,
    pub phi_ref: f64,
    pub theta_ref: f64,
}

impl ControlInput {
    pub fn hover(g: f64) -> Self {
        Self {
            thrust: g,
            phi_ref: 0.0,
            theta_ref: 0.0,
        }
    }

    pub fn to_vec(&self) -> Vector3<f64> {
        Vector3::new(self.thrust, self.phi_ref, self.theta_ref)
    }

    pub fn from_vec(u: &Vector3<f64>) -> Self {
        Self {
            thrust: u[0],
            phi_ref: u[1],
            theta_ref: u[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpcConfig {
    pub horizon: usize,
    pub dt: f64,
    pub g: f64,
    pub k_phi: f64,
    pub k_theta: f64,
    pub tau_phi: f64,
    pub tau_theta: f64,
    /// Linear velocity damping per axis (1/s).
    pub drag: [f64; 3],
    pub thrust_max: f64,
    pub attitude_max: f64,
    pub q_pos: f64,
    pub q_vel: f64,
    pub q_att: f64,
    pub q_u: [f64; 3],
    pub q_du: [f64; 3],
    pub max_iterations: usize,
    /// Stop once an iteration lowers the cost by less than this fraction.
    pub rel_tol: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        let g = 9.81;
        Self {
            horizon: 20,
            dt: 0.05,
            g,
            k_phi: 1.0,
            k_theta: 1.0,
            tau_phi: 0.2,
            tau_theta: 0.2,
            drag: [0.1; 3],
            thrust_max: 2.0 * g,
            attitude_max: 30f64.to_radians(),
            q_pos: 10.0,
            q_vel: 1.0,
            q_att: 1.0,
            q_u: [0.1; 3],
            q_du: [1.0; 3],
            max_iterations: 200,
            rel_tol: 1e-9,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |m: &str| Err(ControlError::InvalidConfig(m.to_string()));
        if self.horizon < 2 {
            return bad("horizon must be at least 2");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.tau_phi > 0.0 && self.tau_theta > 0.0) {
            return bad("attitude time constants must be positive");
        }
        let weights = [self.q_pos, self.q_vel, self.q_att]
            .into_iter()
            .chain(self.q_u)
            .chain(self.q_du)
            .chain(self.drag);
        if weights.clone().any(|w| !(w >= 0.0)) {
            return bad("weights and drag must be non-negative");
        }
        if !(self.thrust_max > 0.0 && self.attitude_max > 0.0) {
            return bad("input bounds must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        Ok(())
    }

    pub fn hover(&self) -> ControlInput {
        ControlInput::hover(self.g)
    }

    /// Diagonal of the 8×8 state weight.
    pub fn q_state(&self) -> StateVec {
        let (p, v, a) = (self.q_pos, self.q_vel, self.q_att);
        StateVec::from_column_slice(&[p, p, p, v, v, v, a, a])
    }

    pub fn project(&self, u: &Vector3<f64>) -> Vector3<f64> {
        let a = self.attitude_max;
        Vector3::new(
            u[0].clamp(0.0, self.thrust_max),
            u[1].clamp(-a, a),
            u[2].clamp(-a, a),
        )
    }
}

/// Body thrust direction after roll `φ` then pitch `θ`.
fn thrust_dir(phi: f64, theta: f64) -> Vector3<f64> {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Vector3::new(st * cp, -sp, ct * cp)
}

pub(crate) fn step_vec(x: &StateVec, u: &Vector3<f64>, dt: f64, cfg: &MpcConfig) -> StateVec {
    let (phi, theta) = (x[6], x[7]);
    let v = Vector3::new(x[3], x[4], x[5]);
    let acc = u[0] * thrust_dir(phi, theta) - Vector3::new(0.0, 0.0, cfg.g)
        - Vector3::from(cfg.drag).component_mul(&v);
    let mut out = *x;
    for i in 0..3 {
        out[i] += dt * v[i];
        out[3 + i] += dt * acc[i];
    }
    out[6] += dt * (cfg.k_phi * u[1] - phi) / cfg.tau_phi;
    out[7] += dt * (cfg.k_theta * u[2] - theta) / cfg.tau_theta;
    out
}

/// Jacobians of [`step_vec`] with respect to state and input.
pub(crate) fn step_jacobians(
    x: &StateVec,
    u: &Vector3<f64>,
    dt: f64,
    cfg: &MpcConfig,
) -> (SMatrix<f64, 8, 8>, SMatrix<f64, 8, 3>) {
    let (phi, theta) = (x[6], x[7]);
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let d_phi = Vector3::new(-st * sp, -cp, -ct * sp);
    let d_theta = Vector3::new(ct * cp, 0.0, -st * cp);
    let mut fx = SMatrix::<f64, 8, 8>::identity();
    for i in 0..3 {
        fx[(i, 3 + i)] = dt;
        fx[(3 + i, 3 + i)] = 1.0 - dt * cfg.drag[i];
        fx[(3 + i, 6)] = dt * u[0] * d_phi[i];
        fx[(3 + i, 7)] = dt * u[0] * d_theta[i];
    }
    fx[(6, 6)] = 1.0 - dt / cfg.tau_phi;
    fx[(7, 7)] = 1.0 - dt / cfg.tau_theta;
    let mut fu = SMatrix::<f64, 8, 3>::zeros();
    let dir = thrust_dir(phi, theta);
    for i in 0..3 {
        fu[(3 + i, 0)] = dt * dir[i];
    }
    fu[(6, 1)] = dt * cfg.k_phi / cfg.tau_phi;
    fu[(7, 2)] = dt * cfg.k_theta / cfg.tau_theta;
    (fx, fu)
}

/// One forward-Euler step of the vehicle model.
pub fn step_dynamics(x: &QuadState, u: &ControlInput, dt: f64, cfg: &MpcConfig) -> QuadState {
    QuadState::from_vec(&step_vec(&x.to_vec(), &u.to_vec(), dt, cfg))
}
