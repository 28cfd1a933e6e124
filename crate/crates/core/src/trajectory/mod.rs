//! Piecewise degree-7 trajectories through waypoint lists and leader/follower
//! clock recovery.

pub mod roots;
mod spline;
mod sync;

use thiserror::Error;

pub use spline::{
    fit_trajectory, fit_trajectory_with_durations, segment_durations, PiecewiseTrajectory,
    Segment, DEGREE, MIN_SEGMENT_DURATION, WAYPOINT_EPS,
};
pub use sync::{resolve_follower_time, SyncFollowerState, DEFAULT_MATCH_TOL, TIME_TOL};

use nalgebra::Point3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("waypoints {0} and its successor coincide")]
    DegenerateWaypoints(usize),
    #[error("time {t} outside [0, {duration}]")]
    OutOfRange { t: f64, duration: f64 },
    #[error("no time on the leader trajectory matches the waypoint")]
    NoMatchingTime,
    #[error("{0}")]
    InvalidInput(String),
}

/// Shared segment durations for two index-aligned waypoint lists: each
/// segment takes as long as the slower vehicle needs at `speed`.
pub fn shared_durations(w1: &[Point3<f64>], w2: &[Point3<f64>], speed: f64) -> Vec<f64> {
    let d1 = segment_durations(w1, speed);
    let d2 = segment_durations(w2, speed);
    d1.iter().zip(&d2).map(|(a, b)| a.max(*b)).collect()
}
