use alloc::vec::Vec;

use super::triangle::ShearedRay;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};
use crate::mesh::TriangleMesh;

/// Maximum triangles per leaf.
pub const MAX_LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    bounds: Aabb,
    /// Leaf: first slot in `tris`. Inner: index of the left child; the right child follows its subtree.
    first: u32,
    /// Leaf: triangle count (> 0). Inner: 0.
    count: u32,
    /// Inner: index of the right child.
    right: u32,
}

/// Bounding volume hierarchy over a mesh's triangles.
///
/// Built by recursive median split of triangle centroids along the longest
/// axis of the centroid bounds; ties between axes go to the lower index and
/// ties between centroids to the lower triangle index, so the tree is a
/// pure function of the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Triangle corners in leaf order.
    tris: Vec<[Vec3; 3]>,
    /// Original triangle index for each slot of `tris`.
    ids: Vec<u32>,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Result<Self> {
        let n = mesh.triangles().len();
        if n == 0 {
            return Err(Error::EmptyMesh);
        }
        let corners: Vec<[Vec3; 3]> = (0..n).map(|t| mesh.corners(t)).collect();
        let centroids: Vec<Vec3> = corners.iter().map(|c| (c[0] + c[1] + c[2]) / 3.0).collect();
        let mut ids: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n / MAX_LEAF_SIZE + 1);
        build_node(&corners, &centroids, &mut ids, 0, &mut nodes);
        let tris = ids.iter().map(|&i| corners[i as usize]).collect();
        Ok(Bvh { nodes, tris, ids })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.count > 0).count()
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    /// Appends every hit parameter `t` (unsorted, unmerged) along `origin + t·dir`.
    pub(crate) fn collect_hits(&self, origin: Vec3, dir: Vec3, out: &mut Vec<f64>) {
        let ray = ShearedRay::new(origin, dir);
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack: [u32; 64] = [0; 64];
        let mut top = 1usize;
        while top > 0 {
            top -= 1;
            let node = &self.nodes[stack[top] as usize];
            if node.bounds.ray_entry(origin, inv, f64::INFINITY).is_none() {
                continue;
            }
            if node.count > 0 {
                let start = node.first as usize;
                for tri in &self.tris[start..start + node.count as usize] {
                    if let Some(t) = ray.intersect(tri[0], tri[1], tri[2]) {
                        out.push(t);
                    }
                }
            } else {
                stack[top] = node.first;
                stack[top + 1] = node.right;
                top += 2;
            }
        }
    }

    /// Checks that every leaf box contains its triangles and every child box
    /// lies inside its parent.
    pub fn check_containment(&self) -> bool {
        self.nodes.iter().all(|node| {
            if node.count > 0 {
                let s = node.first as usize;
                self.tris[s..s + node.count as usize]
                    .iter()
                    .all(|t| t.iter().all(|&p| node.bounds.contains(p)))
            } else {
                node.bounds.contains_box(&self.nodes[node.first as usize].bounds)
                    && node.bounds.contains_box(&self.nodes[node.right as usize].bounds)
            }
        })
    }

    /// Original triangle indices per leaf, in traversal-independent node order.
    pub fn leaves(&self) -> Vec<Vec<u32>> {
        self.nodes
            .iter()
            .filter(|n| n.count > 0)
            .map(|n| self.ids[n.first as usize..(n.first + n.count) as usize].to_vec())
            .collect()
    }
}

fn build_node(
    corners: &[[Vec3; 3]],
    centroids: &[Vec3],
    ids: &mut [u32],
    offset: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let bounds = ids.iter().fold(Aabb::EMPTY, |b, &i| {
        let c = &corners[i as usize];
        b.grow(c[0]).grow(c[1]).grow(c[2])
    });
    let index = nodes.len() as u32;
    nodes.push(Node {
        bounds,
        first: offset as u32,
        count: ids.len() as u32,
        right: 0,
    });
    if ids.len() <= MAX_LEAF_SIZE {
        return index;
    }
    let axis = Aabb::from_points(ids.iter().map(|&i| centroids[i as usize])).longest_axis();
    ids.sort_unstable_by(|&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let mid = ids.len() / 2;
    let (left, right) = ids.split_at_mut(mid);
    let l = build_node(corners, centroids, left, offset, nodes);
    let r = build_node(corners, centroids, right, offset + mid, nodes);
    let node = &mut nodes[index as usize];
    node.first = l;
    node.count = 0;
    node.right = r;
    index
}
