//! Regenerates the obstacle meshes of the bundled scenes.
//!
//! ```text
//! cargo run -p tether-core --example make_scenes -- scenes
//! ```

use std::fs::File;
use std::path::Path;

use nalgebra::{Point2, Point3};
use tether_core::geometry::shapes::{cuboid, extrude_polygon};
use tether_core::geometry::{write_ascii_stl, TriMesh};

fn merge(parts: &[TriMesh]) -> TriMesh {
    let mut out = TriMesh::default();
    for p in parts {
        out.append(p);
    }
    out
}

/// Wall across x ∈ [−1, 1] with a rectangular duct through it.
fn tunnel() -> TriMesh {
    let (y0, y1, z0, z1) = (-0.5, 0.5, 1.0, 2.3);
    let block = |ya: f64, yb: f64, za: f64, zb: f64| cuboid(Point3::new(-1.0, ya, za), Point3::new(1.0, yb, zb));
    merge(&[
        block(-3.0, 3.0, 0.0, z0),
        block(-3.0, 3.0, z1, 4.5),
        block(-3.0, y0, z0, z1),
        block(y1, 3.0, z0, z1),
    ])
}

/// Thin wall in the y–z plane with an inclined parallelogram hole: corners
/// (y, z) = (−1.1, 1.3), (1.1, 1.8), (1.1, 2.45), (−1.1, 1.95).
fn inclined_hole() -> TriMesh {
    let slope = 0.5 / 2.2;
    let lower = |y: f64| 1.55 + slope * y;
    let upper = |y: f64| 2.2 + slope * y;
    let p = Point2::new;
    let panels = [
        vec![p(-3.0, 0.0), p(3.0, 0.0), p(3.0, lower(3.0)), p(-3.0, lower(-3.0))],
        vec![p(-3.0, upper(-3.0)), p(3.0, upper(3.0)), p(3.0, 4.5), p(-3.0, 4.5)],
        vec![p(-3.0, lower(-3.0)), p(-1.1, lower(-1.1)), p(-1.1, upper(-1.1)), p(-3.0, upper(-3.0))],
        vec![p(1.1, lower(1.1)), p(3.0, lower(3.0)), p(3.0, upper(3.0)), p(1.1, upper(1.1))],
    ];
    // polygon axes (y, z) and extrusion along x form a right-handed frame
    let parts: Vec<TriMesh> = panels
        .iter()
        .map(|poly| extrude_polygon(poly, 0.1, |q, s| Point3::new(s, q.x, q.y)))
        .collect();
    merge(&parts)
}

fn write(dir: &Path, name: &str, mesh: &TriMesh) {
    std::fs::create_dir_all(dir).expect("create scene directory");
    let path = dir.join(format!("{name}.stl"));
    let mut f = File::create(&path).expect("create STL");
    write_ascii_stl(mesh, name, &mut f).expect("write STL");
    println!("{} ({} triangles)", path.display(), mesh.triangles.len());
}

fn main() {
    let root = std::env::args().nth(1).unwrap_or_else(|| "scenes".into());
    let root = Path::new(&root);
    write(&root.join("tunnel"), "tunnel", &tunnel());
    write(&root.join("inclined_hole"), "inclined_hole", &inclined_hole());
}
