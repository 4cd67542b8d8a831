//! Ray casting against triangle meshes: per-ray hit lists, depth rendering
//! and ground-truth shell extraction.
//!
//! Every pixel casts exactly one ray through its center. Hits closer than
//! [`MIN_HIT_T`] are ignored and hits within [`MERGE_EPS`] of the previously
//! kept hit are merged, which removes the duplicates produced when a ray
//! passes through an edge or vertex shared by several triangles.

mod bvh;
mod triangle;

use alloc::vec::Vec;

pub use bvh::{Bvh, MAX_LEAF_SIZE};
pub use triangle::{ray_triangle, ShearedRay};

use crate::camera::CameraModel;
use crate::error::Result;
use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;
use crate::raster::DepthImage;
use crate::shell::ObjectShell;

/// Smallest accepted ray parameter.
pub const MIN_HIT_T: f64 = 1e-9;
/// Hits closer than this to the previous kept hit are merged.
pub const MERGE_EPS: f64 = 1e-9;

/// Sorted, merged hit parameters along one ray.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RayHits {
    hits: Vec<f64>,
}

impl RayHits {
    /// Sorts raw hit parameters, drops those below [`MIN_HIT_T`] and merges near-duplicates.
    pub fn from_raw(mut raw: Vec<f64>) -> Self {
        raw.retain(|&t| t > MIN_HIT_T);
        raw.sort_unstable_by(f64::total_cmp);
        let mut hits: Vec<f64> = Vec::with_capacity(raw.len());
        for t in raw {
            match hits.last() {
                Some(&last) if t - last <= MERGE_EPS => {}
                _ => hits.push(t),
            }
        }
        RayHits { hits }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.hits
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn first(&self) -> Option<f64> {
        self.hits.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.hits.last().copied()
    }
}

pub fn build_bvh(mesh: &TriangleMesh) -> Result<Bvh> {
    Bvh::build(mesh)
}

/// All surface crossings along `origin + t·dir`, `dir` a unit vector.
pub fn intersect_ray(bvh: &Bvh, origin: Vec3, dir: Vec3) -> RayHits {
    debug_assert!((dir.norm() - 1.0).abs() <= 1e-9, "ray direction must be unit length");
    let mut raw = Vec::new();
    bvh.collect_hits(origin, dir, &mut raw);
    RayHits::from_raw(raw)
}

/// Reusable per-pixel caster. Rays use the unnormalized pixel direction with
/// unit z, so hit parameters are z-depths.
pub struct PixelCaster<'a> {
    bvh: &'a Bvh,
    camera: CameraModel,
    /// Pixel window that can contain hits: `u0..u1`, `v0..v1`.
    window: (usize, usize, usize, usize),
    scratch: Vec<f64>,
}

impl<'a> PixelCaster<'a> {
    pub fn new(bvh: &'a Bvh, camera: &CameraModel) -> Self {
        PixelCaster {
            bvh,
            camera: *camera,
            window: projected_window(bvh, camera),
            scratch: Vec::new(),
        }
    }

    /// Merged z-depths of every surface crossing along the pixel's central ray.
    pub fn hits(&mut self, u: usize, v: usize) -> RayHits {
        let (u0, u1, v0, v1) = self.window;
        if u < u0 || u >= u1 || v < v0 || v >= v1 {
            return RayHits::default();
        }
        self.scratch.clear();
        self.bvh.collect_hits(Vec3::ZERO, self.camera.pixel_ray(u, v), &mut self.scratch);
        RayHits::from_raw(core::mem::take(&mut self.scratch))
    }
}

/// Pixel window covering the projection of the BVH bounds. When any box
/// corner is not in front of the camera, the whole raster.
fn projected_window(bvh: &Bvh, cam: &CameraModel) -> (usize, usize, usize, usize) {
    let full = (0, cam.width(), 0, cam.height());
    let b = bvh.bounds();
    let mut umin = f64::INFINITY;
    let mut umax = f64::NEG_INFINITY;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for k in 0..8 {
        let p = Vec3::new(
            if k & 1 == 0 { b.min.x } else { b.max.x },
            if k & 2 == 0 { b.min.y } else { b.max.y },
            if k & 4 == 0 { b.min.z } else { b.max.z },
        );
        match cam.project(p) {
            Ok((u, v, _)) => {
                umin = umin.min(u);
                umax = umax.max(u);
                vmin = vmin.min(v);
                vmax = vmax.max(v);
            }
            Err(_) => return full,
        }
    }
    let clamp = |x: f64, hi: usize| -> usize {
        if x <= 0.0 {
            0
        } else if x >= hi as f64 {
            hi
        } else {
            x as usize
        }
    };
    (
        clamp(libm::floor(umin) - 1.0, cam.width()),
        clamp(libm::ceil(umax) + 2.0, cam.width()),
        clamp(libm::floor(vmin) - 1.0, cam.height()),
        clamp(libm::ceil(vmax) + 2.0, cam.height()),
    )
}

/// Depth of the first surface hit per pixel; pixels without a hit are invalid.
pub fn render_depth(mesh: &TriangleMesh, cam: &CameraModel) -> DepthImage {
    render_depth_with(&match Bvh::build(mesh) {
        Ok(b) => b,
        Err(_) => return DepthImage::empty(cam.width(), cam.height()),
    }, cam)
}

pub fn render_depth_with(bvh: &Bvh, cam: &CameraModel) -> DepthImage {
    let mut caster = PixelCaster::new(bvh, cam);
    DepthImage::from_fn(cam.width(), cam.height(), |u, v| caster.hits(u, v).first())
}

/// Ground-truth shell: first hit into the entry layer and last hit into the
/// exit layer. Rays crossing the surface more than twice keep only the
/// outermost pair.
pub fn extract_shell(mesh: &TriangleMesh, cam: &CameraModel) -> ObjectShell {
    match Bvh::build(mesh) {
        Ok(bvh) => extract_shell_with(&bvh, cam),
        Err(_) => empty_shell(cam),
    }
}

pub fn extract_shell_with(bvh: &Bvh, cam: &CameraModel) -> ObjectShell {
    let (w, h) = (cam.width(), cam.height());
    let mut caster = PixelCaster::new(bvh, cam);
    let mut entry = Vec::with_capacity(w * h);
    let mut exit = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let hits = caster.hits(u, v);
            let (a, b) = match (hits.first(), hits.last()) {
                (Some(a), Some(b)) => (a as f32, b as f32),
                _ => (0.0, 0.0),
            };
            // A hit that rounds to zero in f32 would desynchronize the masks.
            if a > 0.0 && b > 0.0 {
                entry.push(a);
                exit.push(b);
            } else {
                entry.push(0.0);
                exit.push(0.0);
            }
        }
    }
    let entry = DepthImage::new(w, h, entry).expect("finite depths");
    let exit = DepthImage::new(w, h, exit).expect("finite depths");
    ObjectShell::new(entry, exit, *cam).expect("first hit <= last hit on identical masks")
}

fn empty_shell(cam: &CameraModel) -> ObjectShell {
    let e = DepthImage::empty(cam.width(), cam.height());
    ObjectShell::new(e.clone(), e, *cam).expect("empty layers are a valid shell")
}

/// Fraction of occupied pixels whose ray crosses the surface more than twice.
pub fn monotonicity_report(mesh: &TriangleMesh, cam: &CameraModel) -> f64 {
    let bvh = match Bvh::build(mesh) {
        Ok(b) => b,
        Err(_) => return 0.0,
    };
    let mut caster = PixelCaster::new(&bvh, cam);
    let (mut occupied, mut violating) = (0usize, 0usize);
    for v in 0..cam.height() {
        for u in 0..cam.width() {
            let n = caster.hits(u, v).len();
            if n > 0 {
                occupied += 1;
                if n > 2 {
                    violating += 1;
                }
            }
        }
    }
    if occupied == 0 {
        0.0
    } else {
        violating as f64 / occupied as f64
    }
}
