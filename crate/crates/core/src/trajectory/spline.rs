use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::roots::horner;
use super::TrajectoryError;

pub const DEGREE: usize = 7;
const NC: usize = DEGREE + 1;

/// Lower bound on segment duration (s).
pub const MIN_SEGMENT_DURATION: f64 = 0.25;

/// Consecutive waypoints closer than this are rejected.
pub const WAYPOINT_EPS: f64 = 1e-9;

/// One polynomial piece. Coefficients are per axis, increasing degree, in
/// the local variable `s = (t − t0) / duration ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t0: f64,
    pub duration: f64,
    pub coeffs: [[f64; NC]; 3],
}

impl Segment {
    pub fn end(&self) -> f64 {
        self.t0 + self.duration
    }

    pub fn local(&self, t: f64) -> f64 {
        if t >= self.end() {
            return 1.0;
        }
        (t - self.t0) / self.duration
    }

    /// `order`-th time derivative at local `s`.
    pub fn eval_local(&self, s: f64, order: usize) -> Vector3<f64> {
        let scale = self.duration.powi(order as i32).recip();
        Vector3::from_fn(|axis, _| {
            let c = &self.coeffs[axis];
            if order == 0 {
                return horner(c, s);
            }
            let mut acc = 0.0;
            for i in (order..NC).rev() {
                acc = acc * s + falling(i, order) * c[i];
            }
            acc * scale
        })
    }
}

fn falling(i: usize, k: usize) -> f64 {
    (0..k).map(|m| (i - m) as f64).product()
}

/// Piecewise degree-7 trajectory in 3D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseTrajectory {
    pub segments: Vec<Segment>,
}

impl PiecewiseTrajectory {
    pub fn duration(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end())
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Segment owning `t`: the last one with `t0 ≤ t`, clamped.
    pub fn segment_index(&self, t: f64) -> usize {
        self.segments
            .partition_point(|s| s.t0 <= t)
            .saturating_sub(1)
    }

    pub fn evaluate(&self, t: f64) -> Result<Point3<f64>, TrajectoryError> {
        self.derivative(t, 0).map(Point3::from)
    }

    pub fn derivative(&self, t: f64, order: usize) -> Result<Vector3<f64>, TrajectoryError> {
        let total = self.duration();
        if !(0.0..=total).contains(&t) {
            return Err(TrajectoryError::OutOfRange { t, duration: total });
        }
        let seg = &self.segments[self.segment_index(t)];
        Ok(seg.eval_local(seg.local(t), order))
    }

    /// Holds the end points outside `[0, T]` (derivatives zero there).
    pub fn evaluate_clamped(&self, t: f64) -> Point3<f64> {
        let t = t.clamp(0.0, self.duration());
        Point3::from(self.derivative(t, 0).expect("clamped"))
    }

    pub fn derivative_clamped(&self, t: f64, order: usize) -> Vector3<f64> {
        if order == 0 {
            return self.evaluate_clamped(t).coords;
        }
        if t < 0.0 || t > self.duration() {
            return Vector3::zeros();
        }
        self.derivative(t, order).expect("in range")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }
}

/// Segment durations for waypoints traversed at `speed`, floored at
/// [`MIN_SEGMENT_DURATION`].
pub fn segment_durations(waypoints: &[Point3<f64>], speed: f64) -> Vec<f64> {
    waypoints
        .windows(2)
        .map(|w| ((w[1] - w[0]).norm() / speed).max(MIN_SEGMENT_DURATION))
        .collect()
}

/// Interpolating trajectory with the durations implied by `speed`.
pub fn fit_trajectory(
    waypoints: &[Point3<f64>],
    speed: f64,
) -> Result<PiecewiseTrajectory, TrajectoryError> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(TrajectoryError::InvalidInput(format!("speed must be positive, got {speed}")));
    }
    if waypoints.len() < 2 {
        return Err(TrajectoryError::InvalidInput("need at least two waypoints".into()));
    }
    fit_trajectory_with_durations(waypoints, &segment_durations(waypoints, speed))
}

/// Velocity at an interior waypoint, per axis: the duration-weighted mean
/// slope. Where the axis keeps its direction the value is capped at 1.5× the
/// smaller neighbouring slope, which keeps both segments monotone along that
/// axis. Reversing axes are left uncapped so the vehicle only stops at the
/// two ends.
fn joint_velocity(prev: f64, next: f64, d_prev: f64, d_next: f64) -> f64 {
    let (m1, m2) = (prev / d_prev, next / d_next);
    let mean = (prev + next) / (d_prev + d_next);
    if m1 * m2 <= 0.0 {
        return mean;
    }
    mean.signum() * mean.abs().min(1.5 * m1.abs().min(m2.abs()))
}

/// Interpolating trajectory through `waypoints` with the given segment
/// durations. Each segment is the degree-7 Hermite polynomial matching
/// position, velocity, acceleration and jerk at both ends: rest at the first
/// and last waypoint, the limited mean slope (zero acceleration and jerk) at
/// interior ones. Derivatives up to jerk are therefore continuous.
pub fn fit_trajectory_with_durations(
    waypoints: &[Point3<f64>],
    durations: &[f64],
) -> Result<PiecewiseTrajectory, TrajectoryError> {
    let m = durations.len();
    if waypoints.len() < 2 || waypoints.len() != m + 1 {
        return Err(TrajectoryError::InvalidInput(format!(
            "{} waypoints need {} durations, got {m}",
            waypoints.len(),
            waypoints.len().saturating_sub(1)
        )));
    }
    if let Some(d) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(TrajectoryError::InvalidInput(format!("bad segment duration {d}")));
    }
    if let Some(k) = waypoints
        .windows(2)
        .position(|w| (w[1] - w[0]).norm() <= WAYPOINT_EPS)
    {
        return Err(TrajectoryError::DegenerateWaypoints(k));
    }

    let velocity = |k: usize, axis: usize| -> f64 {
        if k == 0 || k == m {
            return 0.0;
        }
        joint_velocity(
            waypoints[k][axis] - waypoints[k - 1][axis],
            waypoints[k + 1][axis] - waypoints[k][axis],
            durations[k - 1],
            durations[k],
        )
    };

    let mut t0 = 0.0;
    let mut segments = Vec::with_capacity(m);
    for k in 0..m {
        let d = durations[k];
        let mut coeffs = [[0.0; NC]; 3];
        for (axis, c) in coeffs.iter_mut().enumerate() {
            let (p0, p1) = (waypoints[k][axis], waypoints[k + 1][axis]);
            let (v0, v1) = (velocity(k, axis) * d, velocity(k + 1, axis) * d);
            // remaining conditions at s = 1: value, slope, zero 2nd and 3rd
            let a = p1 - p0 - v0;
            let b = v1 - v0;
            *c = [
                p0,
                v0,
                0.0,
                0.0,
                35.0 * a - 15.0 * b,
                -84.0 * a + 39.0 * b,
                70.0 * a - 34.0 * b,
                -20.0 * a + 10.0 * b,
            ];
        }
        segments.push(Segment {
            t0,
            duration: d,
            coeffs,
        });
        t0 += d;
    }
    Ok(PiecewiseTrajectory { segments })
}
