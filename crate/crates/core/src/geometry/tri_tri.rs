//! Triangle–triangle intersection predicate.
//!
//! Interval-overlap test on the line where the two supporting planes meet.
//! Signed plane distances within [`PLANE_EPS`] snap to zero; pairs that are
//! coplanar under that rule fall through to a 2D overlap test. Touching
//! (zero-penetration) contact reports an intersection.

use nalgebra::{Point2, Point3, Vector3};

/// Snap distance (m) for signed point-to-plane distances.
pub const PLANE_EPS: f64 = 1e-10;

type Tri = [Point3<f64>; 3];

fn plane_distances(tri: &Tri, other: &Tri) -> Option<[f64; 3]> {
    let n = (other[1] - other[0]).cross(&(other[2] - other[0]));
    let len = n.norm();
    if len == 0.0 {
        return None;
    }
    let n = n / len;
    let d = tri.map(|p| {
        let s = n.dot(&(p - other[0]));
        if s.abs() < PLANE_EPS {
            0.0
        } else {
            s
        }
    });
    Some(d)
}

fn same_side(d: &[f64; 3]) -> bool {
    (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0)
}

/// True when the two closed triangles share at least one point.
pub fn triangles_intersect(t1: &Tri, t2: &Tri) -> bool {
    let Some(d1) = plane_distances(t1, t2) else {
        return false;
    };
    if same_side(&d1) {
        return false;
    }
    let Some(d2) = plane_distances(t2, t1) else {
        return false;
    };
    if same_side(&d2) {
        return false;
    }
    if d1.iter().all(|&v| v == 0.0) || d2.iter().all(|&v| v == 0.0) {
        return coplanar_overlap(t1, t2);
    }

    let n1 = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let n2 = (t2[1] - t2[0]).cross(&(t2[2] - t2[0]));
    let dir = n1.cross(&n2);
    let axis = dir.iamax();
    let (Some(i1), Some(i2)) = (interval(t1, &d1, axis), interval(t2, &d2, axis)) else {
        return coplanar_overlap(t1, t2);
    };
    i1.0.max(i2.0) <= i1.1.min(i2.1)
}

/// Projected interval where a triangle crosses the other's plane.
fn interval(tri: &Tri, d: &[f64; 3], axis: usize) -> Option<(f64, f64)> {
    let p = tri.map(|v| v[axis]);
    let (lone, a, b) = if d[0] * d[1] > 0.0 {
        (2, 0, 1)
    } else if d[0] * d[2] > 0.0 {
        (1, 0, 2)
    } else if d[1] * d[2] > 0.0 || d[0] != 0.0 {
        (0, 1, 2)
    } else if d[1] != 0.0 {
        (1, 0, 2)
    } else if d[2] != 0.0 {
        (2, 0, 1)
    } else {
        return None;
    };
    let cross = |other: usize| {
        let denom = d[lone] - d[other];
        if denom == 0.0 {
            p[lone]
        } else {
            p[lone] + (p[other] - p[lone]) * d[lone] / denom
        }
    };
    let (x, y) = (cross(a), cross(b));
    Some((x.min(y), x.max(y)))
}

fn orient(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: &Point2<f64>, b: &Point2<f64>, p: &Point2<f64>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>, d: &Point2<f64>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

fn point_in_triangle(p: &Point2<f64>, t: &[Point2<f64>; 3]) -> bool {
    let s0 = orient(&t[0], &t[1], p);
    let s1 = orient(&t[1], &t[2], p);
    let s2 = orient(&t[2], &t[0], p);
    (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0)
}

/// Overlap of two (near-)coplanar triangles, projected onto the coordinate
/// plane that best preserves their shape.
fn coplanar_overlap(t1: &Tri, t2: &Tri) -> bool {
    let n: Vector3<f64> = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let drop = n.iamax();
    let (i, j) = match drop {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let a = t1.map(|p| Point2::new(p[i], p[j]));
    let b = t2.map(|p| Point2::new(p[i], p[j]));
    for k in 0..3 {
        for l in 0..3 {
            if segments_touch(&a[k], &a[(k + 1) % 3], &b[l], &b[(l + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle(&a[0], &b) || point_in_triangle(&b[0], &a)
}
