//! Catenary model of the slack rope hanging between the two vehicles.
//!
//! The rope lives in the vertical plane through both mounting points. A
//! [`PlaneFrame`] maps world points into that plane (horizontal coordinate
//! `u`, out-of-plane coordinate `n`, vertical coordinate `w`) and back; the
//! curve itself is `f(x) = a·cosh((x − b)/a) + c` in plane coordinates.

use nalgebra::{Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack below which the rope is treated as taut.
pub const EPS_SLACK: f64 = 1e-6;

/// Default convergence tolerance on `sinh(A)/A − r`.
pub const RATIO_TOL: f64 = 1e-12;

/// Default Newton iteration budget before falling back to bisection.
pub const RATIO_MAX_ITER: usize = 100;

const BISECT_LO: f64 = 1e-6;
const BISECT_HI: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatenaryError {
    #[error("infeasible rope geometry: {0}")]
    InfeasibleGeometry(String),
    #[error("catenary ratio solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

/// Vertical plane through a point, rotated by `yaw` about world Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame {
    pub origin: Point3<f64>,
    pub yaw: f64,
}

impl PlaneFrame {
    pub fn new(origin: Point3<f64>, yaw: f64) -> Self {
        Self { origin, yaw }
    }

    /// Unit vector of the in-plane horizontal axis.
    pub fn axis(&self) -> Vector3<f64> {
        let (s, c) = self.yaw.sin_cos();
        Vector3::new(c, s, 0.0)
    }

    /// Unit normal of the plane (horizontal, perpendicular to [`Self::axis`]).
    pub fn normal(&self) -> Vector3<f64> {
        let (s, c) = self.yaw.sin_cos();
        Vector3::new(-s, c, 0.0)
    }

    /// World point to local `(u, n, w)` coordinates.
    pub fn to_local(&self, p: &Point3<f64>) -> Vector3<f64> {
        let (s, c) = self.yaw.sin_cos();
        let d = p - self.origin;
        Vector3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// Local `(u, n, w)` coordinates back to world.
    pub fn to_world(&self, local: &Vector3<f64>) -> Point3<f64> {
        let (s, c) = self.yaw.sin_cos();
        Point3::new(
            self.origin.x + c * local.x - s * local.y,
            self.origin.y + s * local.x + c * local.y,
            self.origin.z + local.z,
        )
    }

    /// Projects a world point onto the plane, dropping the normal component.
    pub fn project(&self, p: &Point3<f64>) -> Point2<f64> {
        let l = self.to_local(p);
        Point2::new(l.x, l.z)
    }

    /// Maps an in-plane point to world, optionally offset along the normal.
    pub fn lift(&self, q: &Point2<f64>, normal_offset: f64) -> Point3<f64> {
        self.to_world(&Vector3::new(q.x, normal_offset, q.y))
    }
}

/// Fitted catenary `f(x) = a·cosh((x − b)/a) + c` through two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatenaryParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub length: f64,
}

impl CatenaryParams {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * ((x - self.b) / self.a).cosh() + self.c
    }

    pub fn slope(&self, x: f64) -> f64 {
        ((x - self.b) / self.a).sinh()
    }

    /// Closed-form arc length between the endpoints.
    pub fn arc_length(&self) -> f64 {
        let s = |x: f64| self.a * ((x - self.b) / self.a).sinh();
        (s(self.x2) - s(self.x1)).abs()
    }

    /// Lowest point of the curve restricted to the span between endpoints.
    pub fn lowest_point(&self) -> Point2<f64> {
        let (lo, hi) = self.x_range();
        let x = self.b.clamp(lo, hi);
        Point2::new(x, self.eval(x))
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x1.min(self.x2), self.x1.max(self.x2))
    }
}

/// Solves `sinh(A)/A = r` for `A > 0`.
///
/// Newton's iteration starts from the series guess `√(6(r − 1))`, which never
/// lies left of the root, so the convex residual converges monotonically.
/// Bisection on `[1e-6, 100]` is the fallback when Newton stalls.
pub fn solve_catenary_ratio(r: f64, tol: f64, max_iter: usize) -> Result<f64, CatenaryError> {
    if !r.is_finite() || r <= 1.0 + EPS_SLACK {
        return Err(CatenaryError::InfeasibleGeometry(format!(
            "slack ratio {r} is not above 1 + {EPS_SLACK}"
        )));
    }
    assert!(tol > 0.0, "tolerance must be positive");
    let residual = |a: f64| a.sinh() / a - r;

    let mut a = (6.0 * (r - 1.0)).sqrt();
    for _ in 0..max_iter {
        let res = residual(a);
        if res.abs() <= tol {
            return Ok(a);
        }
        let step = (a.sinh() - r * a) / (a.cosh() - r);
        let next = a - step;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        a = next;
    }
    if residual(a).abs() <= tol {
        return Ok(a);
    }

    // Newton oscillated or ran out of budget.
    let (mut lo, mut hi) = (BISECT_LO, BISECT_HI);
    if residual(hi) < 0.0 {
        return Err(CatenaryError::NonConvergence {
            iterations: max_iter,
            residual: residual(hi),
        });
    }
    let mut iterations = max_iter;
    loop {
        let mid = 0.5 * (lo + hi);
        let res = residual(mid);
        if res.abs() <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            return Err(CatenaryError::NonConvergence {
                iterations,
                residual: res,
            });
        }
        if res < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
}

/// Fits the catenary of a rope of `length` hanging between `p1` and `p2`.
pub fn fit_catenary(
    p1: Point2<f64>,
    p2: Point2<f64>,
    length: f64,
) -> Result<CatenaryParams, CatenaryError> {
    let (left, right) = if p1.x <= p2.x { (p1, p2) } else { (p2, p1) };
    let dx = right.x - left.x;
    let dy = right.y - left.y;
    if !(dx > 1e-12) {
        return Err(CatenaryError::InfeasibleGeometry(
            "endpoints share the same horizontal coordinate".into(),
        ));
    }
    let chord = dx.hypot(dy);
    if !(length > chord) {
        return Err(CatenaryError::InfeasibleGeometry(format!(
            "rope length {length} does not exceed chord {chord}"
        )));
    }

    let r = (length * length - dy * dy).sqrt() / dx;
    let big_a = solve_catenary_ratio(r, RATIO_TOL * r.max(1.0), RATIO_MAX_ITER)?;

    let a = dx / (2.0 * big_a);
    let x_mid = 0.5 * (left.x + right.x);
    let b = x_mid - a * (dy / length).atanh();
    let c_left = left.y - a * ((left.x - b) / a).cosh();
    let c_right = right.y - a * ((right.x - b) / a).cosh();
    let c = 0.5 * (c_left + c_right);

    Ok(CatenaryParams {
        a,
        b,
        c,
        x1: p1.x,
        y1: p1.y,
        x2: p2.x,
        y2: p2.y,
        length,
    })
}

/// `n` points evenly spaced in `x` from `x1` to `x2`; the first and last are
/// the stored endpoints.
pub fn sample_curve(params: &CatenaryParams, n: usize) -> Vec<Point2<f64>> {
    assert!(n >= 2, "need at least two samples");
    let step = (params.x2 - params.x1) / (n - 1) as f64;
    let mut out: Vec<Point2<f64>> = (0..n)
        .map(|i| {
            let x = params.x1 + step * i as f64;
            Point2::new(x, params.eval(x))
        })
        .collect();
    out[0] = Point2::new(params.x1, params.y1);
    out[n - 1] = Point2::new(params.x2, params.y2);
    out
}

/// Samples the curve and maps each sample into world space.
pub fn lift_to_3d(params: &CatenaryParams, frame: &PlaneFrame, n: usize) -> Vec<Point3<f64>> {
    sample_curve(params, n)
        .iter()
        .map(|q| frame.lift(q, 0.0))
        .collect()
}
