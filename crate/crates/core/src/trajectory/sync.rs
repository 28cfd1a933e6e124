use nalgebra::Point3;

use super::roots::{horner, real_roots};
use super::spline::PiecewiseTrajectory;
use super::TrajectoryError;

/// Default position tolerance (m) for matching the published waypoint.
pub const DEFAULT_MATCH_TOL: f64 = 1e-8;

/// Slack (s) when comparing a candidate against the previous resolved time.
pub const TIME_TOL: f64 = 1e-6;

/// Candidates closer than this (s) are treated as the same passage through
/// the waypoint; the one with the smallest residual wins.
const CLUSTER_WINDOW: f64 = 1e-3;

/// Follower-side state for recovering the leader's clock from its
/// published waypoints.
#[derive(Debug, Clone)]
pub struct SyncFollowerState {
    pub tr1: PiecewiseTrajectory,
    pub tr2: PiecewiseTrajectory,
    pub tolerance: f64,
    segment: usize,
    last_t: f64,
}

struct Candidate {
    t: f64,
    /// Largest per-axis distance from the waypoint at `t`.
    residual: f64,
}

impl SyncFollowerState {
    pub fn new(tr1: PiecewiseTrajectory, tr2: PiecewiseTrajectory) -> Self {
        Self {
            tr1,
            tr2,
            tolerance: DEFAULT_MATCH_TOL,
            segment: 0,
            last_t: 0.0,
        }
    }

    pub fn segment(&self) -> usize {
        self.segment
    }

    pub fn reset(&mut self) {
        self.segment = 0;
        self.last_t = 0.0;
    }

    fn tol_for(&self, wp: &Point3<f64>) -> f64 {
        self.tolerance * wp.coords.amax().max(1.0)
    }

    /// Times in segment `k` at which `tr1` passes through `wp1`, earliest
    /// first.
    fn matches_in(&self, k: usize, wp1: &Point3<f64>) -> Vec<Candidate> {
        let seg = &self.tr1.segments[k];
        let last = k + 1 == self.tr1.len();
        let tol = self.tol_for(wp1);
        let shifted: Vec<[f64; 8]> = (0..3)
            .map(|axis| {
                let mut c = seg.coeffs[axis];
                c[0] -= wp1[axis];
                c
            })
            .collect();
        // an axis that moves less than the tolerance matches any time
        let moving: Vec<usize> = (0..3)
            .filter(|&axis| shifted[axis][1..].iter().map(|v| v.abs()).sum::<f64>() > tol)
            .collect();
        for axis in 0..3 {
            if !moving.contains(&axis) && shifted[axis][0].abs() > tol {
                return Vec::new();
            }
        }
        if moving.is_empty() {
            let residual = shifted.iter().map(|c| c[0].abs()).fold(0.0, f64::max);
            return vec![Candidate { t: seg.t0, residual }];
        }

        let mut out: Vec<Candidate> = Vec::new();
        for &axis in &moving {
            for s in real_roots(&shifted[axis], 0.0, 1.0, tol) {
                if s >= 1.0 && !last {
                    continue;
                }
                // every other axis must also pass through wp1 here
                let residual = (0..3)
                    .map(|o| (horner(&seg.coeffs[o], s) - wp1[o]).abs())
                    .fold(0.0, f64::max);
                if residual <= tol {
                    out.push(Candidate {
                        t: seg.t0 + s * seg.duration,
                        residual,
                    });
                }
            }
        }
        out.sort_by(|a, b| a.t.total_cmp(&b.t));
        out
    }

    /// Earliest passage at or after `not_before`: among the per-axis roots
    /// of that passage, the one that best reproduces all three coordinates.
    fn pick(cands: &[Candidate], not_before: f64) -> Option<f64> {
        let first = cands.iter().position(|c| c.t >= not_before - TIME_TOL)?;
        let t_first = cands[first].t;
        cands[first..]
            .iter()
            .take_while(|c| c.t - t_first <= CLUSTER_WINDOW)
            // ties go to the later root, so an exact segment end wins
            .fold(None, |best: Option<&Candidate>, c| match best {
                Some(b) if b.residual < c.residual => Some(b),
                _ => Some(c),
            })
            .map(|c| c.t)
    }

    /// Recovers the leader time `t` at which `tr1(t) = wp1` and returns it
    /// with the follower's waypoint `tr2(t)`. Searches from the cached
    /// segment forward, then from the first segment.
    pub fn resolve(&mut self, wp1: &Point3<f64>) -> Result<(f64, Point3<f64>), TrajectoryError> {
        let n = self.tr1.len();
        let mut found = None;
        for k in self.segment..n {
            if let Some(t) = Self::pick(&self.matches_in(k, wp1), self.last_t) {
                found = Some((k, t));
                break;
            }
        }
        if found.is_none() {
            for k in 0..n {
                if let Some(t) = Self::pick(&self.matches_in(k, wp1), f64::NEG_INFINITY) {
                    found = Some((k, t));
                    break;
                }
            }
        }
        let Some((k, t)) = found else {
            return Err(TrajectoryError::NoMatchingTime);
        };
        self.segment = k;
        self.last_t = t;
        Ok((t, self.tr2.evaluate_clamped(t)))
    }
}

/// Free-function form of [`SyncFollowerState::resolve`].
pub fn resolve_follower_time(
    sync: &mut SyncFollowerState,
    wp1: &Point3<f64>,
) -> Result<(f64, Point3<f64>), TrajectoryError> {
    sync.resolve(wp1)
}
