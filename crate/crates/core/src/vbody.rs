//! The "V" rigid body: a thin prism built around the hanging rope and both
//! mounting points, regenerated for every formation state.
//!
//! In the formation plane the profile is bounded above by the chord between
//! the mounting points (extended horizontally by `safety_dx` on both sides)
//! and below by two lines that pass through the outer points and stay under
//! every sampled rope point. The lines meet at the bottom apex.

use nalgebra::{Point2, Point3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catenary::{fit_catenary, sample_curve, CatenaryError, CatenaryParams, PlaneFrame};
use crate::formation::FormationState;
use crate::geometry::shapes::{extrude_indexed, offset_polygon};
use crate::geometry::TriMesh;

/// Minimum drop of the tangent support points below the rope's lowest point.
/// Keeps both support lines strictly sloped when the lowest rope point is a
/// mounting point.
pub const APEX_CLEARANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VBodyError {
    #[error(transparent)]
    Catenary(#[from] CatenaryError),
    #[error("support lines are parallel; no apex")]
    TangentDegenerate,
    #[error("invalid body config: {0}")]
    InvalidConfig(String),
}

/// Shape parameters of the generated body. `safety_dx` must be at least the
/// vehicle's bounding radius for the vehicles to be enclosed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VBodyConfig {
    pub safety_dx: f64,
    pub thickness: f64,
    pub mount_offset: f64,
    pub curve_samples: usize,
    /// Extra clearance added all round the body (outline offset and
    /// thickness). Zero gives the exact body; planning uses a positive value
    /// to leave room for tracking error.
    pub margin: f64,
}

impl Default for VBodyConfig {
    fn default() -> Self {
        Self {
            safety_dx: 0.15,
            thickness: 0.2,
            mount_offset: 0.0,
            curve_samples: 128,
            margin: 0.0,
        }
    }
}

impl VBodyConfig {
    pub fn validate(&self) -> Result<(), VBodyError> {
        if !(self.safety_dx > 0.0) {
            return Err(VBodyError::InvalidConfig("safety_dx must be positive".into()));
        }
        if !(self.thickness > 0.0) {
            return Err(VBodyError::InvalidConfig("thickness must be positive".into()));
        }
        if !(self.mount_offset >= 0.0) {
            return Err(VBodyError::InvalidConfig("mount_offset must be non-negative".into()));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(VBodyError::InvalidConfig("margin must be non-negative".into()));
        }
        if self.curve_samples < 16 {
            return Err(VBodyError::InvalidConfig("curve_samples must be at least 16".into()));
        }
        Ok(())
    }
}

/// The six labelled in-plane points, plus the data they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub lower: Point2<f64>,
    pub inner_r: Point2<f64>,
    pub right: Point2<f64>,
    pub intersect: Point2<f64>,
    pub left: Point2<f64>,
    pub inner_l: Point2<f64>,
    pub t_right: Point2<f64>,
    pub t_left: Point2<f64>,
    pub curve: CatenaryParams,
    pub samples: Vec<Point2<f64>>,
}

impl Profile {
    /// Points in vertex order: lower, inner_r, right, intersect, left, inner_l.
    pub fn points(&self) -> [Point2<f64>; 6] {
        [
            self.lower,
            self.inner_r,
            self.right,
            self.intersect,
            self.left,
            self.inner_l,
        ]
    }

    /// Boundary polygon (indices into [`Self::points`]); `lower` is interior.
    pub const BOUNDARY: [usize; 5] = [5, 1, 2, 3, 4];

    pub fn polygon(&self) -> [Point2<f64>; 5] {
        let p = self.points();
        Self::BOUNDARY.map(|i| p[i])
    }
}

/// Signed area test: positive when `c` is left of the directed line `a → b`.
pub fn orient2d(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Height at `x` of the line through `p` and `q`.
fn line_at(p: &Point2<f64>, q: &Point2<f64>, x: f64) -> f64 {
    p.y + (q.y - p.y) * (x - p.x) / (q.x - p.x)
}

/// Lowest support point on the vertical through `pivot_x` such that the line
/// from `outer` through it passes on or below every sample.
fn support_point(outer: &Point2<f64>, samples: &[Point2<f64>], pivot_x: f64, ceiling: f64) -> Point2<f64> {
    let y = samples
        .iter()
        .map(|c| line_at(outer, c, pivot_x))
        .fold(ceiling, f64::min);
    Point2::new(pivot_x, y)
}

fn line_intersection(
    a0: &Point2<f64>,
    a1: &Point2<f64>,
    b0: &Point2<f64>,
    b1: &Point2<f64>,
) -> Option<Point2<f64>> {
    let da = a1 - a0;
    let db = b1 - b0;
    let det = da.x * db.y - da.y * db.x;
    let scale = da.norm() * db.norm();
    if det.abs() <= 1e-12 * scale {
        return None;
    }
    let w = b0 - a0;
    let t = (w.x * db.y - w.y * db.x) / det;
    Some(a0 + da * t)
}

/// In-plane construction of the body outline for a formation state.
pub fn build_profile(
    state: &FormationState,
    rope_length: f64,
    cfg: &VBodyConfig,
) -> Result<Profile, VBodyError> {
    cfg.validate()?;
    let (u, w) = state.half_offset();
    let inner_l = Point2::new(-u, -w - cfg.mount_offset);
    let inner_r = Point2::new(u, w - cfg.mount_offset);
    profile_from_mounts(inner_l, inner_r, rope_length, cfg)
}

/// Profile for explicit in-plane mounting points (`inner_l.x < inner_r.x`).
pub fn profile_from_mounts(
    inner_l: Point2<f64>,
    inner_r: Point2<f64>,
    rope_length: f64,
    cfg: &VBodyConfig,
) -> Result<Profile, VBodyError> {
    let curve = fit_catenary(inner_l, inner_r, rope_length)?;
    let lower = curve.lowest_point();
    let offset = Vector2::new(cfg.safety_dx, 0.0);
    let right = inner_r + offset;
    let left = inner_l - offset;
    let samples = sample_curve(&curve, cfg.curve_samples);

    let ceiling = lower.y - APEX_CLEARANCE;
    let t_right = support_point(&right, &samples, lower.x, ceiling);
    let t_left = support_point(&left, &samples, lower.x, ceiling);
    let intersect =
        line_intersection(&left, &t_left, &right, &t_right).ok_or(VBodyError::TangentDegenerate)?;

    Ok(Profile {
        lower,
        inner_r,
        right,
        intersect,
        left,
        inner_l,
        t_right,
        t_left,
        curve,
        samples,
    })
}

/// Closed mesh of the extruded profile. Vertices follow the labelled order
/// (lower, inner_r, right, intersect, left, inner_l), first on one face and
/// then the same six on the opposite face.
#[derive(Debug, Clone)]
pub struct VBodyMesh {
    pub mesh: TriMesh,
    pub profile: Profile,
    pub frame: PlaneFrame,
}

impl VBodyMesh {
    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.mesh.vertices
    }
}

/// Pads the profile by `±thickness/2` along the plane normal (plus the
/// configured margin all round) and maps it into world space.
pub fn extrude(profile: Profile, frame: &PlaneFrame, cfg: &VBodyConfig) -> VBodyMesh {
    let mut points = profile.points();
    if cfg.margin > 0.0 {
        let grown = offset_polygon(&profile.polygon(), cfg.margin);
        for (k, &i) in Profile::BOUNDARY.iter().enumerate() {
            points[i] = grown[k];
        }
    }
    let half = 0.5 * cfg.thickness + cfg.margin;
    // extrusion runs along −normal so (axis, up, extrusion) is right-handed
    let mesh = extrude_indexed(&points, &Profile::BOUNDARY, half, |q, s| {
        frame.to_world(&Vector3::new(q.x, -s, q.y))
    });
    VBodyMesh {
        mesh,
        profile,
        frame: *frame,
    }
}

/// Body enclosing both vehicles and the rope for `state`.
pub fn body_for_state(
    state: &FormationState,
    rope_length: f64,
    cfg: &VBodyConfig,
) -> Result<VBodyMesh, VBodyError> {
    let profile = build_profile(state, rope_length, cfg)?;
    Ok(extrude(profile, &state.plane(), cfg))
}
