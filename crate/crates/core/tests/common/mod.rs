//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's own versions of the same routine.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{Isometry3, Point3, Vector3};
use rand::Rng;
use tether_core::formation::FormationState;
use tether_core::geometry::TriMesh;

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

fn orient3d(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>, d: &Point3<f64>) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a))
}

/// Closed segment against closed triangle, via signed volumes.
pub fn segment_hits_triangle(p: &Point3<f64>, q: &Point3<f64>, t: &[Point3<f64>; 3]) -> bool {
    let [a, b, c] = t;
    let (sp, sq) = (orient3d(a, b, c, p), orient3d(a, b, c, q));
    if (sp > 0.0 && sq > 0.0) || (sp < 0.0 && sq < 0.0) {
        return false;
    }
    if sp == 0.0 && sq == 0.0 {
        return coplanar_segment_triangle(p, q, t);
    }
    let s1 = orient3d(p, q, a, b);
    let s2 = orient3d(p, q, b, c);
    let s3 = orient3d(p, q, c, a);
    (s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0)
}

fn drop_axis(n: &Vector3<f64>) -> (usize, usize) {
    let ax = n.abs();
    if ax.x >= ax.y && ax.x >= ax.z {
        (1, 2)
    } else if ax.y >= ax.z {
        (0, 2)
    } else {
        (0, 1)
    }
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn seg2_intersect(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let d1 = cross2(a, b, p);
    let d2 = cross2(a, b, q);
    let d3 = cross2(p, q, a);
    let d4 = cross2(p, q, b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |o: [f64; 2], a: [f64; 2], x: [f64; 2]| {
        cross2(o, a, x) == 0.0
            && x[0] >= o[0].min(a[0])
            && x[0] <= o[0].max(a[0])
            && x[1] >= o[1].min(a[1])
            && x[1] <= o[1].max(a[1])
    };
    on(a, b, p) || on(a, b, q) || on(p, q, a) || on(p, q, b)
}

fn inside2(x: [f64; 2], t: [[f64; 2]; 3]) -> bool {
    let s = [cross2(t[0], t[1], x), cross2(t[1], t[2], x), cross2(t[2], t[0], x)];
    s.iter().all(|v| *v >= 0.0) || s.iter().all(|v| *v <= 0.0)
}

fn coplanar_segment_triangle(p: &Point3<f64>, q: &Point3<f64>, t: &[Point3<f64>; 3]) -> bool {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let (i, j) = drop_axis(&n);
    let f = |v: &Point3<f64>| [v[i], v[j]];
    let tt = [f(&t[0]), f(&t[1]), f(&t[2])];
    let (p2, q2) = (f(p), f(q));
    inside2(p2, tt) || (0..3).any(|k| seg2_intersect(p2, q2, tt[k], tt[(k + 1) % 3]))
}

/// Two closed triangles share a point: some edge of one meets the other.
pub fn triangles_touch(a: &[Point3<f64>; 3], b: &[Point3<f64>; 3]) -> bool {
    (0..3).any(|k| segment_hits_triangle(&a[k], &a[(k + 1) % 3], b))
        || (0..3).any(|k| segment_hits_triangle(&b[k], &b[(k + 1) % 3], a))
}

/// All-pairs surface intersection with `b` placed by `iso`.
pub fn brute_force_touch(a: &TriMesh, b: &TriMesh, iso: &Isometry3<f64>) -> bool {
    let bt: Vec<[Point3<f64>; 3]> = (0..b.triangles.len())
        .map(|i| b.triangle(i).map(|p| iso * p))
        .collect();
    (0..a.triangles.len()).any(|i| {
        let ta = a.triangle(i);
        bt.iter().any(|tb| triangles_touch(&ta, tb))
    })
}

fn ray_hits(origin: &Point3<f64>, dir: &Vector3<f64>, t: &[Point3<f64>; 3]) -> bool {
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-300 {
        return false;
    }
    let s = origin - t[0];
    let u = s.dot(&h) / det;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qv = s.cross(&e1);
    let v = dir.dot(&qv) / det;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    e2.dot(&qv) / det > 0.0
}

pub fn point_triangle_distance(p: &Point3<f64>, t: &[Point3<f64>; 3]) -> f64 {
    // plane projection when it lands inside, otherwise the nearest edge
    let n = (t[1] - t[0]).cross(&(t[2] - t[0])).normalize();
    let d = (p - t[0]).dot(&n);
    let proj = p - d * n;
    let inside = {
        let c = |a: &Point3<f64>, b: &Point3<f64>| (b - a).cross(&(proj - a)).dot(&n);
        c(&t[0], &t[1]) >= 0.0 && c(&t[1], &t[2]) >= 0.0 && c(&t[2], &t[0]) >= 0.0
    };
    if inside {
        return d.abs();
    }
    (0..3)
        .map(|k| {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let ab = b - a;
            let s = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
            (p - (a + s * ab)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Unsigned distance from `p` to the mesh surface.
pub fn surface_distance(p: &Point3<f64>, mesh: &TriMesh) -> f64 {
    (0..mesh.triangles.len())
        .map(|i| point_triangle_distance(p, &mesh.triangle(i)))
        .fold(f64::INFINITY, f64::min)
}

/// Closed-set containment in a closed mesh: within `surface_tol` of the
/// surface, or an odd number of crossings along a majority of three
/// generic rays.
pub fn point_in_closed_mesh(p: &Point3<f64>, mesh: &TriMesh, surface_tol: f64) -> bool {
    let tris: Vec<[Point3<f64>; 3]> = (0..mesh.triangles.len()).map(|i| mesh.triangle(i)).collect();
    if tris.iter().any(|t| point_triangle_distance(p, t) <= surface_tol) {
        return true;
    }
    let dirs = [
        Vector3::new(0.5773, 0.3141, 0.8183),
        Vector3::new(-0.2718, 0.9133, 0.1414),
        Vector3::new(0.6917, -0.4142, -0.7023),
    ];
    let odd = dirs
        .iter()
        .filter(|d| tris.iter().filter(|t| ray_hits(p, d, t)).count() % 2 == 1)
        .count();
    odd >= 2
}

/// Every directed edge appears once and its reverse once, and the
/// divergence-theorem volume is positive.
pub fn closed_and_positive(mesh: &TriMesh) -> bool {
    let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            *edges.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    let manifold = edges.iter().all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1));
    let volume: f64 = (0..mesh.triangles.len())
        .map(|i| {
            let [a, b, c] = mesh.triangle(i);
            a.coords.dot(&b.coords.cross(&c.coords)) / 6.0
        })
        .sum();
    manifold && volume > 0.0
}

/// A well-formed formation state for a rope of `rope_length`.
pub fn random_state(rng: &mut impl Rng, rope_length: f64) -> FormationState {
    FormationState::new(
        Point3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.5..3.0)),
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        rng.gen_range(0.15..0.97) * rope_length,
        rng.gen_range(-1.0..1.0) * std::f64::consts::FRAC_PI_3,
    )
}
