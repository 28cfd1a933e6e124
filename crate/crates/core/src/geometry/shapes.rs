//! Mesh builders: boxes, extruded polygons and ear-clipping triangulation.

use nalgebra::{Point2, Point3};

use super::TriMesh;

/// Closed axis-aligned box with outward winding.
pub fn cuboid(min: Point3<f64>, max: Point3<f64>) -> TriMesh {
    let v = (0..8)
        .map(|i| {
            Point3::new(
                if i & 1 == 0 { min.x } else { max.x },
                if i & 2 == 0 { min.y } else { max.y },
                if i & 4 == 0 { min.z } else { max.z },
            )
        })
        .collect();
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let tris = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriMesh::new(v, tris).expect("static indices").0
}

fn signed_area(poly: &[Point2<f64>]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

fn cross(o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Triangulates a simple polygon by ear clipping. Output triangles are
/// counter-clockwise regardless of the input winding.
pub fn ear_clip(poly: &[Point2<f64>]) -> Vec<[usize; 3]> {
    let n = poly.len();
    assert!(n >= 3, "polygon needs at least three vertices");
    let mut idx: Vec<usize> = (0..n).collect();
    if signed_area(poly) < 0.0 {
        idx.reverse();
    }
    let mut out = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (i0, i1, i2) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (&poly[i0], &poly[i1], &poly[i2]);
            if cross(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != i0
                    && j != i1
                    && j != i2
                    && cross(a, b, &poly[j]) >= 0.0
                    && cross(b, c, &poly[j]) >= 0.0
                    && cross(c, a, &poly[j]) >= 0.0
            });
            if !blocked {
                out.push([i0, i1, i2]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // numerically flat remainder: fan it so the output stays complete
            let (first, rest) = idx.split_first().unwrap();
            for w in rest.windows(2) {
                out.push([*first, w[0], w[1]]);
            }
            return out;
        }
    }
    out.push([idx[0], idx[1], idx[2]]);
    out
}

/// Moves every edge of a simple polygon outward by `margin` and returns the
/// intersections of consecutive moved edges (mitred corners). The result
/// covers every point within `margin` of the input.
pub fn offset_polygon(poly: &[Point2<f64>], margin: f64) -> Vec<Point2<f64>> {
    let n = poly.len();
    let sign = if signed_area(poly) >= 0.0 { 1.0 } else { -1.0 };
    let outward = |a: &Point2<f64>, b: &Point2<f64>| {
        let e = (b - a).normalize();
        nalgebra::Vector2::new(e.y, -e.x) * sign
    };
    (0..n)
        .map(|i| {
            let (prev, cur, next) = (&poly[(i + n - 1) % n], &poly[i], &poly[(i + 1) % n]);
            let (n1, n2) = (outward(prev, cur), outward(cur, next));
            let denom = 1.0 + n1.dot(&n2);
            if denom < 1e-9 {
                // edge folds back on itself; push straight out
                return cur + n1 * margin;
            }
            cur + (n1 + n2) * (margin / denom)
        })
        .collect()
}

/// Extrudes a simple polygon into a closed prism. `place(q, s)` maps polygon
/// point `q` to world at signed offset `s` along the extrusion direction; the
/// two caps sit at `±half_depth`. The map must be orientation preserving
/// (in-plane axes × extrusion direction right-handed).
pub fn extrude_polygon(
    poly: &[Point2<f64>],
    half_depth: f64,
    place: impl Fn(&Point2<f64>, f64) -> Point3<f64>,
) -> TriMesh {
    let boundary: Vec<usize> = (0..poly.len()).collect();
    extrude_indexed(poly, &boundary, half_depth, place)
}

/// Like [`extrude_polygon`], but every point in `points` becomes a vertex
/// (first all at `+half_depth`, then all at `−half_depth`) while only the
/// points listed in `boundary` form the polygon. Points not on the boundary
/// stay unreferenced.
pub fn extrude_indexed(
    points: &[Point2<f64>],
    boundary: &[usize],
    half_depth: f64,
    place: impl Fn(&Point2<f64>, f64) -> Point3<f64>,
) -> TriMesh {
    let n = points.len();
    let poly: Vec<Point2<f64>> = boundary.iter().map(|&i| points[i]).collect();
    let m = poly.len();
    let ring: Vec<usize> = if signed_area(&poly) >= 0.0 {
        boundary.to_vec()
    } else {
        boundary.iter().rev().copied().collect()
    };
    let mut vertices: Vec<Point3<f64>> = points.iter().map(|q| place(q, half_depth)).collect();
    vertices.extend(points.iter().map(|q| place(q, -half_depth)));

    let mut tris = Vec::with_capacity(4 * m - 4);
    for t in ear_clip(&poly) {
        let [a, b, c] = t.map(|k| boundary[k]);
        tris.push([a as u32, b as u32, c as u32]);
        tris.push([(n + a) as u32, (n + c) as u32, (n + b) as u32]);
    }
    for k in 0..m {
        let (i, j) = (ring[k], ring[(k + 1) % m]);
        let (fi, fj, bi, bj) = (i as u32, j as u32, (n + i) as u32, (n + j) as u32);
        tris.push([fi, bi, bj]);
        tris.push([fi, bj, fj]);
    }
    TriMesh::new(vertices, tris).expect("indices in range").0
}
