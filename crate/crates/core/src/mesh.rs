//! Indexed triangle meshes and point clouds.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Pose, Vec3};

/// Triangles with area at or below this (m²) are dropped on construction.
pub const DEGENERATE_AREA: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Validates indices and finiteness, then drops zero-area triangles.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteVertex(i));
        }
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &index in tri {
                if index as usize >= n {
                    return Err(Error::VertexIndex {
                        triangle: t,
                        index,
                        vertex_count: n,
                    });
                }
            }
        }
        let triangles = triangles
            .into_iter()
            .filter(|t| triangle_area(vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]) > DEGENERATE_AREA)
            .collect();
        Ok(TriangleMesh {
            vertices,
            triangles,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    #[inline]
    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        triangle_area(a, b, c)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Bounds of the referenced vertices.
    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::EMPTY;
        for tri in &self.triangles {
            for &i in tri {
                b = b.grow(self.vertices[i as usize]);
            }
        }
        b
    }

    /// Bounds of every vertex, referenced or not.
    pub fn vertex_bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied())
    }

    pub fn transformed(&self, pose: &Pose) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|&v| pose.transform_point(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Same topology with new positions. Triangles that become degenerate are kept;
    /// use [`TriangleMesh::new`] to re-validate.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<TriangleMesh> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::InvalidParameter("vertex count must not change"));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteVertex(i));
        }
        Ok(TriangleMesh {
            vertices,
            triangles: self.triangles.clone(),
        })
    }

    /// Concatenates two meshes without welding.
    pub fn merged(&self, other: &TriangleMesh) -> TriangleMesh {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]));
        TriangleMesh {
            vertices,
            triangles,
        }
    }

    /// Counts undirected edges by how many triangles use them, and checks that
    /// every shared edge is traversed once in each direction.
    pub fn edge_report(&self) -> EdgeReport {
        let mut directed: Vec<(u32, u32)> = Vec::with_capacity(self.triangles.len() * 3);
        for t in &self.triangles {
            for k in 0..3 {
                directed.push((t[k], t[(k + 1) % 3]));
            }
        }
        let mut undirected: Vec<(u32, u32, bool)> = directed
            .iter()
            .map(|&(a, b)| if a < b { (a, b, true) } else { (b, a, false) })
            .collect();
        undirected.sort_unstable();

        let mut report = EdgeReport::default();
        let mut i = 0;
        while i < undirected.len() {
            let (a, b, _) = undirected[i];
            let mut j = i;
            let mut forward = 0usize;
            while j < undirected.len() && undirected[j].0 == a && undirected[j].1 == b {
                forward += undirected[j].2 as usize;
                j += 1;
            }
            match j - i {
                1 => report.boundary += 1,
                2 => {
                    report.manifold += 1;
                    if forward != 1 {
                        report.inconsistent += 1;
                    }
                }
                _ => report.non_manifold += 1,
            }
            i = j;
        }
        report
    }
}

/// Edge usage counts from [`TriangleMesh::edge_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeReport {
    /// Edges used by exactly one triangle.
    pub boundary: usize,
    /// Edges used by exactly two triangles.
    pub manifold: usize,
    /// Edges used by three or more triangles.
    pub non_manifold: usize,
    /// Two-triangle edges whose triangles traverse it in the same direction.
    pub inconsistent: usize,
}

impl EdgeReport {
    /// Every edge is shared by exactly two triangles.
    pub fn is_closed(&self) -> bool {
        self.boundary == 0 && self.non_manifold == 0
    }
}

#[inline]
pub fn triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * (b - a).cross(c - a).norm()
}

/// Points with optional unit normals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointCloud {
            points,
            normals: None,
        }
    }

    pub fn with_normals(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self> {
        if normals.len() != points.len() {
            return Err(Error::NormalCount {
                points: points.len(),
                normals: normals.len(),
            });
        }
        if let Some(i) = normals.iter().position(|n| (n.norm() - 1.0).abs() > 1e-6) {
            return Err(Error::NonUnitNormal(i));
        }
        Ok(PointCloud {
            points,
            normals: Some(normals),
        })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vec3]> {
        self.normals.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.points.iter().copied())
    }

    pub fn transformed(&self, pose: &Pose) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|&p| pose.transform_point(p)).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|&n| pose.transform_vector(n)).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_out_of_range_index() {
        let err = TriangleMesh::new(vec![Vec3::ZERO; 2], vec![[0, 1, 2]]).unwrap_err();
        assert_eq!(
            err,
            Error::VertexIndex {
                triangle: 0,
                index: 2,
                vertex_count: 2
            }
        );
    }

    #[test]
    fn drops_degenerate_triangles() {
        let v = vec![Vec3::ZERO, Vec3::X, Vec3::X * 2.0, Vec3::Y];
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [0, 1, 3], [0, 0, 3]]).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 3]]);
    }

    #[test]
    fn tetrahedron_is_closed_and_consistent() {
        let v = vec![Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z];
        let m = TriangleMesh::new(v, vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]).unwrap();
        let r = m.edge_report();
        assert!(r.is_closed());
        assert_eq!(r.manifold, 6);
        assert_eq!(r.inconsistent, 0);
    }

    #[test]
    fn normals_must_be_unit() {
        assert_eq!(
            PointCloud::with_normals(vec![Vec3::ZERO], vec![Vec3::X * 1.1]),
            Err(Error::NonUnitNormal(0))
        );
        assert!(PointCloud::with_normals(vec![Vec3::ZERO], vec![Vec3::X]).is_ok());
    }
}
