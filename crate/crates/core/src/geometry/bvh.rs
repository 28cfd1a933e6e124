use nalgebra::{Isometry3, Point3};

use super::mesh::{Aabb, TriMesh};
use super::tri_tri::triangles_intersect;
use super::GeometryError;

// Box tests are widened slightly so touching contact survives rounding in
// transformed boxes.
const BOX_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BvhNode {
    pub aabb: Aabb,
    /// Children indices for inner nodes.
    pub children: Option<[u32; 2]>,
    /// Range into [`BvhTree::order`] for leaves.
    pub start: u32,
    pub count: u32,
}

impl BvhNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Median-split bounding volume hierarchy over a mesh's triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct BvhTree {
    pub nodes: Vec<BvhNode>,
    /// Triangle indices, grouped so each leaf owns a contiguous range.
    pub order: Vec<u32>,
    pub max_leaf: usize,
}

struct Build<'a> {
    boxes: &'a [Aabb],
    centroids: &'a [Point3<f64>],
    max_leaf: usize,
    nodes: Vec<BvhNode>,
}

impl Build<'_> {
    fn node(&mut self, order: &mut [u32], start: usize) -> u32 {
        let aabb = order
            .iter()
            .fold(Aabb::empty(), |acc, &t| acc.merge(&self.boxes[t as usize]));
        let id = self.nodes.len();
        self.nodes.push(BvhNode {
            aabb,
            children: None,
            start: start as u32,
            count: order.len() as u32,
        });
        if order.len() <= self.max_leaf {
            return id as u32;
        }
        let centroid_box = Aabb::from_points(order.iter().map(|&t| &self.centroids[t as usize]));
        let axis = centroid_box.longest_axis();
        let mid = order.len() / 2;
        let centroids = self.centroids;
        order.select_nth_unstable_by(mid, |&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let (lo, hi) = order.split_at_mut(mid);
        let left = self.node(lo, start);
        let right = self.node(hi, start + mid);
        let n = &mut self.nodes[id];
        n.children = Some([left, right]);
        n.count = 0;
        id as u32
    }
}

impl BvhTree {
    pub fn build(mesh: &TriMesh, max_leaf: usize) -> Result<Self, GeometryError> {
        if mesh.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        let max_leaf = max_leaf.max(1);
        let boxes: Vec<Aabb> = (0..mesh.triangles.len())
            .map(|i| Aabb::from_points(&mesh.triangle(i)))
            .collect();
        let centroids: Vec<Point3<f64>> = (0..mesh.triangles.len())
            .map(|i| {
                let [a, b, c] = mesh.triangle(i);
                Point3::from((a.coords + b.coords + c.coords) / 3.0)
            })
            .collect();
        let mut order: Vec<u32> = (0..mesh.triangles.len() as u32).collect();
        let mut build = Build {
            boxes: &boxes,
            centroids: &centroids,
            max_leaf,
            nodes: Vec::with_capacity(2 * mesh.triangles.len() / max_leaf + 1),
        };
        build.node(&mut order, 0);
        Ok(Self {
            nodes: build.nodes,
            order,
            max_leaf,
        })
    }

    pub fn root(&self) -> &BvhNode {
        &self.nodes[0]
    }

    pub fn leaf_triangles(&self, node: &BvhNode) -> &[u32] {
        &self.order[node.start as usize..(node.start + node.count) as usize]
    }

    pub fn depth(&self) -> usize {
        fn go(t: &BvhTree, i: u32) -> usize {
            match t.nodes[i as usize].children {
                None => 1,
                Some([l, r]) => 1 + go(t, l).max(go(t, r)),
            }
        }
        go(self, 0)
    }
}

/// A mesh with its hierarchy, ready for intersection queries.
#[derive(Debug, Clone)]
pub struct Collider {
    pub mesh: TriMesh,
    pub bvh: BvhTree,
}

impl Collider {
    pub fn new(mesh: TriMesh, max_leaf: usize) -> Result<Self, GeometryError> {
        let bvh = BvhTree::build(&mesh, max_leaf)?;
        Ok(Self { mesh, bvh })
    }

    pub fn aabb(&self) -> Aabb {
        self.bvh.root().aabb
    }
}

/// True if any triangle of `a` touches any triangle of `b` placed by
/// `transform_b` (expressed in `a`'s frame).
pub fn meshes_intersect(a: &Collider, b: &Collider, transform_b: &Isometry3<f64>) -> bool {
    let identity = *transform_b == Isometry3::identity();
    let b_vertices: Vec<Point3<f64>> = if identity {
        Vec::new()
    } else {
        b.mesh.vertices.iter().map(|p| transform_b * p).collect()
    };
    let b_tri = |i: u32| -> [Point3<f64>; 3] {
        if identity {
            b.mesh.triangle(i as usize)
        } else {
            b.mesh.triangles[i as usize].map(|v| b_vertices[v as usize])
        }
    };
    let b_box = |node: &BvhNode| {
        if identity {
            node.aabb
        } else {
            node.aabb.transformed(transform_b)
        }
    };

    let mut stack: Vec<(u32, u32)> = vec![(0, 0)];
    while let Some((ia, ib)) = stack.pop() {
        let na = &a.bvh.nodes[ia as usize];
        let nb = &b.bvh.nodes[ib as usize];
        if !na.aabb.overlaps(&b_box(nb), BOX_EPS) {
            continue;
        }
        match (na.children, nb.children) {
            (None, None) => {
                for &ta in a.bvh.leaf_triangles(na) {
                    let tri_a = a.mesh.triangle(ta as usize);
                    let box_a = Aabb::from_points(&tri_a);
                    for &tb in b.bvh.leaf_triangles(nb) {
                        let tri_b = b_tri(tb);
                        if box_a.overlaps(&Aabb::from_points(&tri_b), BOX_EPS)
                            && triangles_intersect(&tri_a, &tri_b)
                        {
                            return true;
                        }
                    }
                }
            }
            (Some([l, r]), None) => {
                stack.push((l, ib));
                stack.push((r, ib));
            }
            (None, Some([l, r])) => {
                stack.push((ia, l));
                stack.push((ia, r));
            }
            (Some([al, ar]), Some([bl, br])) => {
                let ea = na.aabb.extent();
                let eb = nb.aabb.extent();
                if ea.x * ea.y * ea.z >= eb.x * eb.y * eb.z {
                    stack.push((al, ib));
                    stack.push((ar, ib));
                } else {
                    stack.push((ia, bl));
                    stack.push((ia, br));
                }
            }
        }
    }
    false
}

/// All-pairs reference for [`meshes_intersect`], without any hierarchy.
pub fn brute_force_intersect(a: &TriMesh, b: &TriMesh, transform_b: &Isometry3<f64>) -> bool {
    let moved = b.transformed(transform_b);
    (0..a.triangles.len()).any(|i| {
        let ta = a.triangle(i);
        (0..moved.triangles.len()).any(|j| triangles_intersect(&ta, &moved.triangle(j)))
    })
}
