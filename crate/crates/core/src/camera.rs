//! Distortion-free pinhole camera.

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Pinhole intrinsics plus raster size. Pixel `(u, v)` has its center at
/// image coordinates `(u, v)`, so the central ray of pixel `(cx, cy)` is
/// the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
}

impl CameraModel {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        if !(fx > 0.0 && fx.is_finite() && fy > 0.0 && fy.is_finite()) {
            return Err(Error::InvalidCamera("focal lengths must be positive"));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("raster must be non-empty"));
        }
        if !(cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64) {
            return Err(Error::InvalidCamera("principal point outside the raster"));
        }
        Ok(CameraModel {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// 640×480 with `fx = fy = 600` and the principal point at the image center.
    pub fn vga() -> Self {
        Self::scaled_vga(1.0)
    }

    /// The [`vga`](Self::vga) geometry at a different resolution, keeping the
    /// field of view: `scale = 0.5` gives 320×240 with `f = 300`.
    pub fn scaled_vga(scale: f64) -> Self {
        let width = libm::round(640.0 * scale) as usize;
        let height = libm::round(480.0 * scale) as usize;
        CameraModel {
            fx: 600.0 * scale,
            fy: 600.0 * scale,
            cx: (width / 2) as f64,
            cy: (height / 2) as f64,
            width,
            height,
        }
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }
    pub fn fy(&self) -> f64 {
        self.fy
    }
    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(u, v, z)` image coordinates and depth of a camera-frame point.
    pub fn project(&self, p: Vec3) -> Result<(f64, f64, f64)> {
        if !(p.z > 0.0) {
            return Err(Error::BehindCamera { z: p.z });
        }
        Ok((
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
            p.z,
        ))
    }

    /// Camera-frame point at depth `z` on the ray through image coordinates `(u, v)`.
    pub fn backproject(&self, u: f64, v: f64, z: f64) -> Result<Vec3> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::InvalidDepth { z });
        }
        Ok(self.backproject_unchecked(u, v, z))
    }

    #[inline]
    pub(crate) fn backproject_unchecked(&self, u: f64, v: f64, z: f64) -> Vec3 {
        Vec3::new((u - self.cx) * z / self.fx, (v - self.cy) * z / self.fy, z)
    }

    /// Direction of the central ray of pixel `(u, v)`, scaled to unit z.
    #[inline]
    pub fn pixel_ray(&self, u: usize, v: usize) -> Vec3 {
        Vec3::new(
            (u as f64 - self.cx) / self.fx,
            (v as f64 - self.cy) / self.fy,
            1.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cam() -> CameraModel {
        CameraModel::new(600.0, 600.0, 320.0, 240.0, 640, 480).unwrap()
    }

    #[test]
    fn optical_axis_projects_to_principal_point() {
        assert_eq!(cam().project(Vec3::new(0.0, 0.0, 0.75)).unwrap(), (320.0, 240.0, 0.75));
    }

    #[test]
    fn offset_point_projects() {
        assert_eq!(cam().project(Vec3::new(0.1, 0.0, 1.0)).unwrap(), (380.0, 240.0, 1.0));
    }

    #[test]
    fn backproject_examples() {
        assert_eq!(cam().backproject(320.0, 240.0, 0.75).unwrap(), Vec3::new(0.0, 0.0, 0.75));
        let p = cam().backproject(380.0, 240.0, 1.0).unwrap();
        assert!((p.x - 0.1).abs() < 1e-15 && p.y == 0.0 && p.z == 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            cam().project(Vec3::new(0.0, 0.0, 0.0)),
            Err(Error::BehindCamera { z: 0.0 })
        );
        assert_eq!(cam().backproject(1.0, 1.0, -0.5), Err(Error::InvalidDepth { z: -0.5 }));
        assert!(CameraModel::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraModel::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
    }

    #[test]
    fn plane_backprojections_stay_on_plane() {
        let c = cam();
        for v in (0..480).step_by(7) {
            for u in (0..640).step_by(7) {
                let p = c.backproject(u as f64, v as f64, 0.5).unwrap();
                assert!((p.z - 0.5).abs() <= 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn project_backproject_round_trip(
            x in -2.0f64..2.0, y in -2.0f64..2.0, z in 0.01f64..5.0
        ) {
            let c = cam();
            let p = Vec3::new(x, y, z);
            let (u, v, d) = c.project(p).unwrap();
            let q = c.backproject(u, v, d).unwrap();
            prop_assert!(q.distance(p) <= 1e-9);
        }
    }
}
