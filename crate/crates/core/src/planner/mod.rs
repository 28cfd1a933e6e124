//! RRT over formation states, with V-body validity checks, path
//! simplification and per-vehicle decomposition.

mod document;
mod metric;
mod nn;
mod rrt;
mod simplify;
mod validity;

use std::f64::consts::{PI, TAU};

use nalgebra::Point3;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formation::{decompose, interpolate, wrap_angle, FormationState, THETA_FORM_MAX};

pub use document::{PlanDocument, PlanTiming};
pub use metric::MetricWeights;
pub use nn::{NearestIndex, GRID_THRESHOLD};
pub use rrt::{plan, PlanRequest, PlanResult, PlannerParams, TreeStats};
pub use simplify::{simplify, SimplifyParams};
pub use validity::{is_state_valid, Environment, StateValidator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("invalid state-space bounds: {0}")]
    InvalidBounds(String),
    #[error("start state is not valid")]
    InvalidStart,
    #[error("goal state is not valid")]
    InvalidGoal,
    #[error("no path found after {iterations} iterations ({nodes} tree nodes)")]
    NoPathFound { nodes: usize, iterations: usize },
}

/// Sampling box of the planner. The yaw interval may wrap; a span of `2π` or
/// more means unrestricted yaw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceBounds {
    pub pos_min: Point3<f64>,
    pub pos_max: Point3<f64>,
    #[serde(default = "default_yaw_min")]
    pub yaw_min: f64,
    #[serde(default = "default_yaw_max")]
    pub yaw_max: f64,
    pub d_min: f64,
    pub d_max: f64,
    #[serde(default = "default_theta_min")]
    pub theta_min: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
}

fn default_yaw_min() -> f64 {
    -PI
}
fn default_yaw_max() -> f64 {
    PI
}
fn default_theta_min() -> f64 {
    -THETA_FORM_MAX
}
fn default_theta_max() -> f64 {
    THETA_FORM_MAX
}

impl StateSpaceBounds {
    pub fn validate(&self, rope_length: f64) -> Result<(), PlanError> {
        let bad = |m: &str| Err(PlanError::InvalidBounds(m.to_string()));
        let vals = [
            self.pos_min.x, self.pos_min.y, self.pos_min.z, self.pos_max.x, self.pos_max.y,
            self.pos_max.z, self.yaw_min, self.yaw_max, self.d_min, self.d_max, self.theta_min,
            self.theta_max,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return bad("non-finite bound");
        }
        if (0..3).any(|i| self.pos_min[i] > self.pos_max[i]) {
            return bad("empty position box");
        }
        if self.yaw_min > self.yaw_max {
            return bad("yaw_min > yaw_max");
        }
        if !(0.0 < self.d_min && self.d_min <= self.d_max) {
            return bad("need 0 < d_min <= d_max");
        }
        if self.d_max >= rope_length {
            return bad("d_max must be below the rope length");
        }
        if self.theta_min > self.theta_max
            || self.theta_min < -THETA_FORM_MAX
            || self.theta_max > THETA_FORM_MAX
        {
            return bad("theta range must lie within ±60°");
        }
        Ok(())
    }

    fn yaw_unrestricted(&self) -> bool {
        self.yaw_max - self.yaw_min >= TAU
    }

    pub fn contains(&self, s: &FormationState) -> bool {
        let pos = (0..3).all(|i| self.pos_min[i] <= s.p[i] && s.p[i] <= self.pos_max[i]);
        let yaw = self.yaw_unrestricted()
            || (s.phi_yaw - self.yaw_min).rem_euclid(TAU) <= self.yaw_max - self.yaw_min;
        pos && yaw
            && self.d_min <= s.d
            && s.d <= self.d_max
            && self.theta_min <= s.theta_form
            && s.theta_form <= self.theta_max
    }

    pub fn sample(&self, rng: &mut impl Rng) -> FormationState {
        let mut u = |lo: f64, hi: f64| if lo < hi { rng.gen_range(lo..=hi) } else { lo };
        let p = Point3::new(
            u(self.pos_min.x, self.pos_max.x),
            u(self.pos_min.y, self.pos_max.y),
            u(self.pos_min.z, self.pos_max.z),
        );
        let yaw = if self.yaw_unrestricted() {
            u(-PI, PI)
        } else {
            wrap_angle(u(self.yaw_min, self.yaw_max))
        };
        let d = u(self.d_min, self.d_max);
        let theta = u(self.theta_min, self.theta_max);
        FormationState::new(p, yaw, d, theta)
    }
}

/// Ordered formation states from start to goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FormationPath {
    pub states: Vec<FormationState>,
}

impl FormationPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn length(&self, weights: &MetricWeights) -> f64 {
        weights.path_length(&self.states)
    }
}

/// Per-vehicle waypoint lists, index aligned with the path.
pub fn decompose_path(path: &FormationPath) -> (Vec<Point3<f64>>, Vec<Point3<f64>>) {
    path.states
        .iter()
        .map(|s| {
            let pair = decompose(s);
            (pair.p1, pair.p2)
        })
        .unzip()
}

/// Subdivides every edge (along the formation-space interpolation) so that
/// neither vehicle travels farther than `spacing` between consecutive
/// states. Vehicle travel is measured along the interpolation, so rotations
/// in place are subdivided too. Pure translations of length ≤ `spacing` are
/// left alone.
pub fn densify(path: &FormationPath, spacing: f64) -> FormationPath {
    const PROBES: usize = 16;
    let Some(first) = path.states.first() else {
        return path.clone();
    };
    let mut states = vec![*first];
    for w in path.states.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let mut travel = [0.0f64; 2];
        let mut prev = decompose(a);
        for k in 1..=PROBES {
            let next = decompose(&interpolate(a, b, k as f64 / PROBES as f64));
            travel[0] += (next.p1 - prev.p1).norm();
            travel[1] += (next.p2 - prev.p2).norm();
            prev = next;
        }
        let n = (travel[0].max(travel[1]) / spacing).ceil().max(1.0) as usize;
        for k in 1..n {
            states.push(interpolate(a, b, k as f64 / n as f64));
        }
        states.push(*b);
    }
    FormationPath { states }
}
