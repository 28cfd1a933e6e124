//! Triangle meshes, STL/OBJ I/O, bounding volume hierarchies and
//! mesh–mesh intersection.

mod bvh;
mod mesh;
pub mod shapes;
mod stl;
mod tri_tri;

use std::io::Write;

use thiserror::Error;

pub use bvh::{brute_force_intersect, meshes_intersect, BvhNode, BvhTree, Collider};
pub use mesh::{Aabb, TriMesh, DEGENERATE_AREA};
pub use stl::{load_stl, to_binary_stl, write_ascii_stl, LoadedStl};
pub use tri_tri::{triangles_intersect, PLANE_EPS};

/// Default leaf size for environment hierarchies.
pub const DEFAULT_MAX_LEAF: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("malformed STL at byte {offset}: {reason}")]
    MalformedFile { offset: usize, reason: String },
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("triangle {triangle:?} indexes past {vertices} vertices")]
    IndexOutOfRange { triangle: [u32; 3], vertices: usize },
}

/// Writes `v`/`f` records (1-based indices).
pub fn write_obj(mesh: &TriMesh, out: &mut impl Write) -> std::io::Result<()> {
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}
