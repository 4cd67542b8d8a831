//! Watertight ray/triangle intersection (Woop, Benthin and Wald 2013).
//!
//! The ray is sheared so it runs along +z; edge functions are evaluated in
//! that 2D frame, so a ray through a shared edge or vertex reports a hit on
//! at least one of the adjacent triangles and never slips between them.

use crate::geometry::Vec3;

/// Per-ray shear constants.
#[derive(Debug, Clone, Copy)]
pub struct ShearedRay {
    origin: Vec3,
    kx: usize,
    ky: usize,
    kz: usize,
    sx: f64,
    sy: f64,
    sz: f64,
}

impl ShearedRay {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        let a = [dir.x.abs(), dir.y.abs(), dir.z.abs()];
        let kz = if a[0] > a[1] {
            if a[0] > a[2] {
                0
            } else {
                2
            }
        } else if a[1] > a[2] {
            1
        } else {
            2
        };
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if dir[kz] < 0.0 {
            core::mem::swap(&mut kx, &mut ky);
        }
        ShearedRay {
            origin,
            kx,
            ky,
            kz,
            sx: dir[kx] / dir[kz],
            sy: dir[ky] / dir[kz],
            sz: 1.0 / dir[kz],
        }
    }

    /// Ray parameter of the hit, if any. Both windings count.
    #[inline]
    pub fn intersect(&self, v0: Vec3, v1: Vec3, v2: Vec3) -> Option<f64> {
        let (kx, ky, kz) = (self.kx, self.ky, self.kz);
        let a = v0 - self.origin;
        let b = v1 - self.origin;
        let c = v2 - self.origin;
        let ax = a[kx] - self.sx * a[kz];
        let ay = a[ky] - self.sy * a[kz];
        let bx = b[kx] - self.sx * b[kz];
        let by = b[ky] - self.sy * b[kz];
        let cx = c[kx] - self.sx * c[kz];
        let cy = c[ky] - self.sy * c[kz];
        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return None;
        }
        let det = u + v + w;
        if det == 0.0 {
            return None;
        }
        let az = self.sz * a[kz];
        let bz = self.sz * b[kz];
        let cz = self.sz * c[kz];
        let t = (u * az + v * bz + w * cz) / det;
        t.is_finite().then_some(t)
    }
}

/// One-shot ray/triangle test.
pub fn ray_triangle(origin: Vec3, dir: Vec3, tri: [Vec3; 3]) -> Option<f64> {
    ShearedRay::new(origin, dir).intersect(tri[0], tri[1], tri[2])
}
