use alloc::vec::Vec;

use super::RngStream;
use crate::geometry::{Aabb, Pose, Vec3};
use crate::mesh::TriangleMesh;
use crate::primitives::{box_mesh, cylinder};

/// Largest allowed ratio between bounding-box sides.
pub const MAX_RATIO: f64 = 7.0;
/// Bounds of the largest bounding-box side, meters.
pub const MIN_SIDE: f64 = 0.05;
pub const MAX_SIDE: f64 = 0.35;
/// Placements put the bounding-box center inside this ball.
pub const PLACEMENT_CENTER: Vec3 = Vec3::new(0.0, 0.0, 0.75);
pub const PLACEMENT_RADIUS: f64 = 0.25;

const CUBE_SUBDIVISIONS: usize = 13;
const CYLINDER_SEGMENTS: usize = 64;
const CYLINDER_RINGS: usize = 10;
const CYLINDER_CAP_RINGS: usize = 4;
const MODIFIER_PROBABILITY: f64 = 0.5;
const MAX_SHRINK: f64 = 0.8;
const MAX_PROTRUSION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseShape {
    Cube,
    Cylinder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modifier {
    /// Vertices on the positive side of the plane `n·p = offset` move toward
    /// it by `fraction` of their distance.
    Shrink { fraction: f64, normal: Vec3, offset: f64 },
    /// Gaussian bump of height `amplitude` centered on vertex `vertex`,
    /// pushed away from the bounding-box center.
    Protrusion { vertex: usize, amplitude: f64, sigma: f64 },
}

/// Recipe for one random shape. Plane offsets and protrusion sizes are in
/// the frame of the squished shape scaled to `max_side`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpec {
    pub base: BaseShape,
    /// Per-axis stretch of the unit base, each in `[1, 7]`.
    pub squish: [f64; 3],
    /// Target largest side before the modifier, meters.
    pub max_side: f64,
    pub modifier: Option<Modifier>,
}

fn base_mesh(base: BaseShape) -> TriangleMesh {
    match base {
        BaseShape::Cube => box_mesh(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), CUBE_SUBDIVISIONS),
        BaseShape::Cylinder => cylinder(Vec3::ZERO, 0.5, 1.0, CYLINDER_SEGMENTS, CYLINDER_RINGS, CYLINDER_CAP_RINGS),
    }
}

pub fn sample_shape_spec(s: &mut RngStream) -> ShapeSpec {
    let base = if s.bernoulli(0.5) { BaseShape::Cube } else { BaseShape::Cylinder };
    let squish = [s.uniform(1.0, MAX_RATIO), s.uniform(1.0, MAX_RATIO), s.uniform(1.0, MAX_RATIO)];
    let max_side = s.uniform(MIN_SIDE, MAX_SIDE);
    let modifier = if s.bernoulli(MODIFIER_PROBABILITY) {
        if s.bernoulli(0.5) {
            let normal = random_direction(s);
            Some(Modifier::Shrink {
                fraction: s.uniform(0.1, MAX_SHRINK),
                normal,
                // Through the middle half of the shape along the normal.
                offset: s.uniform(-0.25, 0.25) * max_side,
            })
        } else {
            let vertex_count = base_mesh(base).vertices().len();
            Some(Modifier::Protrusion {
                vertex: s.index(vertex_count),
                amplitude: (s.uniform(0.2, 0.6) * max_side).min(MAX_PROTRUSION),
                sigma: s.uniform(0.1, 0.25) * max_side,
            })
        }
    } else {
        None
    };
    ShapeSpec {
        base,
        squish,
        max_side,
        modifier,
    }
}

pub(crate) fn random_direction(s: &mut RngStream) -> Vec3 {
    loop {
        let v = Vec3::new(s.standard_normal(), s.standard_normal(), s.standard_normal());
        if let Some(n) = v.normalized() {
            return n;
        }
    }
}

/// Closed mesh for `spec`, centered on its bounding box. The final
/// bounding box has side ratio at most 7 and largest side in
/// `[MIN_SIDE, MAX_SIDE]`; modifiers that break either are followed by
/// stretching the short axes and a uniform rescale.
pub fn build_shape(spec: &ShapeSpec) -> TriangleMesh {
    let base = base_mesh(spec.base);
    let s = Vec3::from(spec.squish);
    let mut v: Vec<Vec3> = base.vertices().iter().map(|p| p.component_mul(s)).collect();
    let k = spec.max_side / extent_max(&v);
    for p in &mut v {
        *p = *p * k;
    }

    match spec.modifier {
        Some(Modifier::Shrink { fraction, normal, offset }) => {
            for p in &mut v {
                let d = p.dot(normal) - offset;
                if d > 0.0 {
                    *p -= normal * (fraction * d);
                }
            }
        }
        Some(Modifier::Protrusion { vertex, amplitude, sigma }) => {
            let c = v[vertex.min(v.len() - 1)];
            let dir = (c - Aabb::from_points(v.iter().copied()).center()).normalized().unwrap_or(Vec3::Z);
            let denom = 2.0 * sigma * sigma;
            for p in &mut v {
                let w = libm::exp(-p.distance_squared(c) / denom);
                *p += dir * (amplitude * w);
            }
        }
        None => {}
    }

    // Restore the side-ratio bound by stretching short axes about the center.
    let b = Aabb::from_points(v.iter().copied());
    let (e, c) = (b.extent(), b.center());
    let longest = e.x.max(e.y).max(e.z);
    let floor = longest / MAX_RATIO * (1.0 + 1e-9);
    let stretch = Vec3::new(
        if e.x < floor { floor / e.x } else { 1.0 },
        if e.y < floor { floor / e.y } else { 1.0 },
        if e.z < floor { floor / e.z } else { 1.0 },
    );
    for p in &mut v {
        *p = c + (*p - c).component_mul(stretch);
    }

    // Uniform rescale into the side range, then center the bounding box.
    let b = Aabb::from_points(v.iter().copied());
    let longest = extent_max(&v);
    let k = if longest > MAX_SIDE {
        MAX_SIDE / longest
    } else if longest < MIN_SIDE {
        MIN_SIDE / longest
    } else {
        1.0
    };
    let c = b.center();
    for p in &mut v {
        *p = (*p - c) * k;
    }
    base.with_vertices(v).expect("finite positions, unchanged count")
}

fn extent_max(v: &[Vec3]) -> f64 {
    let e = Aabb::from_points(v.iter().copied()).extent();
    e.x.max(e.y).max(e.z)
}

pub fn gen_shape(stream: &mut RngStream) -> TriangleMesh {
    build_shape(&sample_shape_spec(stream))
}

/// Random rotation about the bounding-box center, then that center moved to
/// a uniform point of the placement ball.
pub fn place_shape(mesh: &TriangleMesh, stream: &mut RngStream) -> (TriangleMesh, Pose) {
    place_shape_with(mesh, stream, true)
}

/// [`place_shape`] with the rotation optionally forced to identity. The
/// stream is consumed identically either way.
pub fn place_shape_with(mesh: &TriangleMesh, stream: &mut RngStream, rotate: bool) -> (TriangleMesh, Pose) {
    let q = stream.unit_quaternion();
    let dir = random_direction(stream);
    let r = PLACEMENT_RADIUS * libm::cbrt(stream.uniform(0.0, 1.0));
    let target = PLACEMENT_CENTER + dir * r;
    let rotation = if rotate { q.to_rotation() } else { crate::geometry::Mat3::IDENTITY };
    let c0 = mesh.vertex_bounds().center();
    let pose = Pose::new(rotation, target - rotation * c0).expect("unit quaternion gives a rotation");
    (mesh.transformed(&pose), pose)
}
