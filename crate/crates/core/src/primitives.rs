//! Closed primitive meshes with outward winding: boxes, spheres, cylinders,
//! cups, plus open planar grids. Used as fixtures and as the base shapes of
//! the synthetic dataset.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;

struct Builder {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            vertices: Vec::new(),
            triangles: Vec::new(),
        }
    }

    fn vertex(&mut self, p: Vec3) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    /// Adds a triangle, flipping it when its normal disagrees with `outward`.
    fn oriented(&mut self, a: u32, b: u32, c: u32, outward: Vec3) {
        let (pa, pb, pc) = (
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        );
        if (pb - pa).cross(pc - pa).dot(outward) >= 0.0 {
            self.triangles.push([a, b, c]);
        } else {
            self.triangles.push([a, c, b]);
        }
    }

    fn quad(&mut self, a: u32, b: u32, c: u32, d: u32, outward: Vec3) {
        self.oriented(a, b, c, outward);
        self.oriented(a, c, d, outward);
    }

    fn finish(self) -> TriangleMesh {
        TriangleMesh::new(self.vertices, self.triangles).expect("primitive indices are in range")
    }
}

/// Axis-aligned box with each face split into an `n × n` grid of quads
/// (`12·n²` triangles). Face grids share their edge vertices, so the mesh is closed.
pub fn box_mesh(center: Vec3, size: Vec3, subdivisions: usize) -> TriangleMesh {
    let n = subdivisions.max(1);
    let side = n + 1;
    let mut b = Builder::new();
    let mut lattice = vec![u32::MAX; side * side * side];
    let mut at = |b: &mut Builder, ijk: [usize; 3]| -> u32 {
        let key = (ijk[2] * side + ijk[1]) * side + ijk[0];
        if lattice[key] == u32::MAX {
            let f = |k: usize, a: usize| (k as f64 / n as f64 - 0.5) * size[a] + center[a];
            lattice[key] = b.vertex(Vec3::new(f(ijk[0], 0), f(ijk[1], 1), f(ijk[2], 2)));
        }
        lattice[key]
    };
    for axis in 0..3 {
        let (ba, ca) = ((axis + 1) % 3, (axis + 2) % 3);
        for (level, sign) in [(0usize, -1.0), (n, 1.0)] {
            let mut outward = [0.0; 3];
            outward[axis] = sign;
            let outward = Vec3::from(outward);
            for i in 0..n {
                for j in 0..n {
                    let mut idx = |di: usize, dj: usize| {
                        let mut ijk = [0usize; 3];
                        ijk[axis] = level;
                        ijk[ba] = i + di;
                        ijk[ca] = j + dj;
                        at(&mut b, ijk)
                    };
                    let (p00, p10, p11, p01) = (idx(0, 0), idx(1, 0), idx(1, 1), idx(0, 1));
                    b.quad(p00, p10, p11, p01, outward);
                }
            }
        }
    }
    b.finish()
}

/// Geodesic sphere from a subdivided icosahedron: `20·4^subdivisions` triangles.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + libm::sqrt(5.0)) / 2.0;
    let mut dirs: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalized().unwrap())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut mid = |a: u32, b: u32, dirs: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = (dirs[a as usize] + dirs[b as usize]).normalized().unwrap();
                dirs.push(m);
                (dirs.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut dirs);
            let bc = mid(b, c, &mut dirs);
            let ca = mid(c, a, &mut dirs);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let mut b = Builder::new();
    for d in &dirs {
        b.vertex(center + *d * radius);
    }
    for [p, q, r] in faces {
        let outward = dirs[p as usize] + dirs[q as usize] + dirs[r as usize];
        b.oriented(p, q, r, outward);
    }
    b.finish()
}

/// Closed cylinder standing along the camera Y axis (image vertical).
///
/// `segments` around, `rings` bands along the height and `cap_rings`
/// concentric bands on each cap.
pub fn cylinder(
    center: Vec3,
    radius: f64,
    height: f64,
    segments: usize,
    rings: usize,
    cap_rings: usize,
) -> TriangleMesh {
    let seg = segments.max(3);
    let rings = rings.max(1);
    let cap_rings = cap_rings.max(1);
    let mut b = Builder::new();
    let point = |rho: f64, j: usize, y: f64| {
        let th = TAU * j as f64 / seg as f64;
        center + Vec3::new(rho * libm::cos(th), y, rho * libm::sin(th))
    };
    // Side rings, bottom (-h/2) to top (+h/2).
    let mut side: Vec<Vec<u32>> = Vec::new();
    for k in 0..=rings {
        let y = -height / 2.0 + height * k as f64 / rings as f64;
        side.push((0..seg).map(|j| b.vertex(point(radius, j, y))).collect());
    }
    for k in 0..rings {
        for j in 0..seg {
            let j1 = (j + 1) % seg;
            let (a, bb, c, d) = (side[k][j], side[k][j1], side[k + 1][j1], side[k + 1][j]);
            let mid = b.vertices[a as usize] + b.vertices[c as usize];
            let outward = Vec3::new(mid.x - 2.0 * center.x, 0.0, mid.z - 2.0 * center.z);
            b.quad(a, bb, c, d, outward);
        }
    }
    for (edge, sign) in [(0usize, -1.0), (rings, 1.0)] {
        let y = sign * height / 2.0;
        let outward = Vec3::new(0.0, sign, 0.0);
        let mut rims: Vec<Vec<u32>> = Vec::new();
        for m in 1..cap_rings {
            let rho = radius * m as f64 / cap_rings as f64;
            rims.push((0..seg).map(|j| b.vertex(point(rho, j, y))).collect());
        }
        rims.push(side[edge].clone());
        let c = b.vertex(center + Vec3::new(0.0, y, 0.0));
        for j in 0..seg {
            b.oriented(c, rims[0][j], rims[0][(j + 1) % seg], outward);
        }
        for m in 0..rims.len() - 1 {
            for j in 0..seg {
                let j1 = (j + 1) % seg;
                b.quad(rims[m][j], rims[m][j1], rims[m + 1][j1], rims[m + 1][j], outward);
            }
        }
    }
    b.finish()
}

/// Closed cup with its axis along +Z and the opening facing the camera.
///
/// `top_z` is the rim depth; the cavity has radius `inner_radius` and the
/// floor is `floor_thickness` above the outer bottom at `top_z + height`.
pub fn cup(
    center_xy: (f64, f64),
    top_z: f64,
    outer_radius: f64,
    inner_radius: f64,
    height: f64,
    floor_thickness: f64,
    segments: usize,
) -> TriangleMesh {
    let seg = segments.max(3);
    let (cx, cy) = center_xy;
    let mut b = Builder::new();
    let ring = |b: &mut Builder, r: f64, z: f64| -> Vec<u32> {
        (0..seg)
            .map(|j| {
                let th = TAU * j as f64 / seg as f64;
                b.vertex(Vec3::new(cx + r * libm::cos(th), cy + r * libm::sin(th), z))
            })
            .collect()
    };
    let bottom_z = top_z + height;
    let floor_z = bottom_z - floor_thickness;
    let outer_top = ring(&mut b, outer_radius, top_z);
    let outer_bottom = ring(&mut b, outer_radius, bottom_z);
    let inner_top = ring(&mut b, inner_radius, top_z);
    let inner_floor = ring(&mut b, inner_radius, floor_z);
    let bottom_center = b.vertex(Vec3::new(cx, cy, bottom_z));
    let floor_center = b.vertex(Vec3::new(cx, cy, floor_z));
    for j in 0..seg {
        let j1 = (j + 1) % seg;
        let th = TAU * (j as f64 + 0.5) / seg as f64;
        let radial = Vec3::new(libm::cos(th), libm::sin(th), 0.0);
        b.quad(outer_top[j], outer_top[j1], outer_bottom[j1], outer_bottom[j], radial);
        b.quad(inner_top[j], inner_top[j1], inner_floor[j1], inner_floor[j], -radial);
        b.quad(outer_top[j], outer_top[j1], inner_top[j1], inner_top[j], -Vec3::Z);
        b.oriented(bottom_center, outer_bottom[j], outer_bottom[j1], Vec3::Z);
        b.oriented(floor_center, inner_floor[j], inner_floor[j1], -Vec3::Z);
    }
    b.finish()
}

/// Open rectangular grid at depth `z` facing the camera, spanning
/// `[-half_x, half_x] × [-half_y, half_y]` with `nx × ny` quads.
pub fn plane_grid(z: f64, half_x: f64, half_y: f64, nx: usize, ny: usize) -> TriangleMesh {
    let (nx, ny) = (nx.max(1), ny.max(1));
    let mut b = Builder::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let x = -half_x + 2.0 * half_x * i as f64 / nx as f64;
            let y = -half_y + 2.0 * half_y * j as f64 / ny as f64;
            b.vertex(Vec3::new(x, y, z));
        }
    }
    let id = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    for j in 0..ny {
        for i in 0..nx {
            b.quad(id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), -Vec3::Z);
        }
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shellmesh::mesh_volume_centroid;

    #[test]
    fn box_is_closed_with_expected_volume() {
        let m = box_mesh(Vec3::new(0.0, 0.0, 0.75), Vec3::new(0.1, 0.1, 0.06), 3);
        assert_eq!(m.triangles().len(), 12 * 9);
        let r = m.edge_report();
        assert!(r.is_closed() && r.inconsistent == 0);
        let (vol, c) = mesh_volume_centroid(&m).unwrap();
        assert!((vol - 6e-4).abs() < 1e-15);
        assert!(c.distance(Vec3::new(0.0, 0.0, 0.75)) < 1e-12);
    }

    #[test]
    fn icosphere_is_closed_and_outward() {
        let m = icosphere(Vec3::ZERO, 1.0, 3);
        assert_eq!(m.triangles().len(), 20 * 64);
        let r = m.edge_report();
        assert!(r.is_closed() && r.inconsistent == 0);
        let (vol, _) = mesh_volume_centroid(&m).unwrap();
        assert!(vol > 4.0 && vol < 4.0 * core::f64::consts::PI / 3.0);
    }

    #[test]
    fn cylinder_is_closed_and_outward() {
        let m = cylinder(Vec3::new(0.0, 0.0, 0.75), 0.03, 0.15, 64, 4, 3);
        let r = m.edge_report();
        assert!(r.is_closed() && r.inconsistent == 0, "{r:?}");
        let (vol, c) = mesh_volume_centroid(&m).unwrap();
        let exact = core::f64::consts::PI * 0.03 * 0.03 * 0.15;
        assert!(vol > 0.99 * exact && vol < exact);
        assert!(c.distance(Vec3::new(0.0, 0.0, 0.75)) < 1e-9);
    }

    #[test]
    fn cup_is_closed_and_outward() {
        let m = cup((0.1, 0.0), 0.7, 0.05, 0.04, 0.1, 0.01, 48);
        let r = m.edge_report();
        assert!(r.is_closed() && r.inconsistent == 0, "{r:?}");
        let (vol, _) = mesh_volume_centroid(&m).unwrap();
        assert!(vol > 0.0);
    }
}
