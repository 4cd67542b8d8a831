//! Parallel-jaw grasp feasibility, width and quality on shells.
//!
//! A grasp is anchored at a visible surface point with the finger axis along
//! the point normal. The outer jaw rests 1 mm in front of the surface and
//! the inner jaw `max_opening` behind it; whatever lies between the jaws
//! inside the pad cross-section is what the gripper would squeeze.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Mat3, Vec3};
use crate::mesh::{PointCloud, TriangleMesh};
use crate::raster::{DepthImage, Mask};
use crate::shell::ObjectShell;
use crate::shellmesh::{mesh_volume_centroid, shell_to_pointcloud, stitch_shell, surface_centroid, DEFAULT_DISCONTINUITY};
use crate::spatial::{KdTree, SegmentIndex};

/// Number of discrete roll angles, evenly covering a full turn.
pub const ROLLS: u8 = 8;
/// Outer jaw plane offset in front of the anchor along the finger axis.
pub const OUTER_JAW_OFFSET: f64 = 1e-3;
/// Span of squeezed points must stay this far inside the opening.
pub const JAW_CLEARANCE: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperModel {
    pub max_opening: f64,
    pub finger_pad_width: f64,
    pub finger_pad_height: f64,
    pub finger_body_thickness: f64,
    pub min_contact_points: usize,
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel {
            max_opening: 0.085,
            finger_pad_width: 0.020,
            finger_pad_height: 0.035,
            finger_body_thickness: 0.010,
            min_contact_points: 20,
        }
    }
}

impl GripperModel {
    pub fn new(
        max_opening: f64,
        finger_pad_width: f64,
        finger_pad_height: f64,
        finger_body_thickness: f64,
        min_contact_points: usize,
    ) -> Result<Self> {
        let dims = [max_opening, finger_pad_width, finger_pad_height, finger_body_thickness];
        if !dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(Error::InvalidParameter("gripper dimensions must be positive"));
        }
        Ok(GripperModel {
            max_opening,
            finger_pad_width,
            finger_pad_height,
            finger_body_thickness,
            min_contact_points,
        })
    }

    /// Same gripper with a different opening.
    pub fn with_opening(self, max_opening: f64) -> Result<Self> {
        GripperModel::new(
            max_opening,
            self.finger_pad_width,
            self.finger_pad_height,
            self.finger_body_thickness,
            self.min_contact_points,
        )
    }
}

/// Grasp frame: x along the finger axis, y across the pad width, z along the
/// pad height. Roll `k` turns the pad `k·π/4` about the finger axis from the
/// zero-roll direction given by [`roll_reference`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspPose {
    anchor: Vec3,
    finger_axis: Vec3,
    roll: u8,
}

impl GraspPose {
    pub fn new(anchor: Vec3, finger_axis: Vec3, roll: u8) -> Result<Self> {
        if !anchor.is_finite() || !finger_axis.is_finite() {
            return Err(Error::InvalidParameter("grasp pose must be finite"));
        }
        if (finger_axis.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter("finger axis must be a unit vector"));
        }
        if roll >= ROLLS {
            return Err(Error::InvalidParameter("roll index must be below 8"));
        }
        Ok(GraspPose { anchor, finger_axis, roll })
    }

    pub fn anchor(&self) -> Vec3 {
        self.anchor
    }

    pub fn finger_axis(&self) -> Vec3 {
        self.finger_axis
    }

    pub fn roll_index(&self) -> u8 {
        self.roll
    }

    /// Roll in radians, `k·π/4`.
    pub fn roll(&self) -> f64 {
        self.roll as f64 * FRAC_PI_4
    }

    /// Columns are the grasp x, y and z axes in the camera frame.
    pub fn frame(&self) -> Mat3 {
        let x = self.finger_axis;
        let r = roll_reference(x);
        let (s, c) = (libm::sin(self.roll()), libm::cos(self.roll()));
        let y = r * c + x.cross(r) * s;
        Mat3::from_cols(x, y, x.cross(y))
    }
}

/// Zero-roll pad direction: the camera up-axis (−y) projected onto the plane
/// perpendicular to `axis`, or the camera right-axis (+x) when the axis is
/// (nearly) vertical.
pub fn roll_reference(axis: Vec3) -> Vec3 {
    let up = -Vec3::Y;
    let p = up - axis * up.dot(axis);
    if p.norm() > 1e-6 {
        return p.normalized().expect("non-zero projection");
    }
    let right = Vec3::X;
    (right - axis * right.dot(axis)).normalized().expect("right is not parallel to a vertical axis")
}

/// Result of checking one grasp against a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspOutcome {
    pub feasible: bool,
    /// Extent of the squeezed points along the finger axis, meters.
    pub width: f64,
    /// Points between the jaws inside the pad cross-section.
    pub contact_points: usize,
}

/// Checks whether the gripper closes on `points` at `pose`.
///
/// In grasp-frame coordinates relative to the anchor, the jaws sit at
/// `x = 1 mm` and `x = 1 mm − max_opening`. Feasible iff
/// - at least `min_contact_points` points lie between the jaws,
/// - their span along x is positive and at most `max_opening − 2 mm`,
/// - no point lies within `finger_body_thickness` in front of the outer jaw,
/// - no point lies anywhere behind the inner jaw: the inner finger would
///   have to be inside the object.
///
/// All checks are restricted to the pad cross-section.
pub fn evaluate_grasp(pose: &GraspPose, points: &[Vec3], gripper: &GripperModel) -> GraspOutcome {
    evaluate_grasp_in_frame(pose.anchor, &pose.frame(), points, gripper)
}

/// [`evaluate_grasp`] with an explicit grasp frame (columns x, y, z).
pub fn evaluate_grasp_in_frame(anchor: Vec3, frame: &Mat3, points: &[Vec3], gripper: &GripperModel) -> GraspOutcome {
    let (ex, ey, ez) = (frame.col(0), frame.col(1), frame.col(2));
    let half_w = gripper.finger_pad_width / 2.0;
    let half_h = gripper.finger_pad_height / 2.0;
    let top = OUTER_JAW_OFFSET;
    let bottom = top - gripper.max_opening;
    let body_top = top + gripper.finger_body_thickness;

    let mut count = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut collision = false;
    for &p in points {
        let d = p - anchor;
        let x = d.dot(ex);
        if x > body_top {
            continue;
        }
        if d.dot(ey).abs() > half_w || d.dot(ez).abs() > half_h {
            continue;
        }
        if x > top || x < bottom {
            collision = true;
            continue;
        }
        count += 1;
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let width = if count > 0 { hi - lo } else { 0.0 };
    let feasible = !collision
        && count >= gripper.min_contact_points
        && width > 0.0
        && width <= gripper.max_opening - JAW_CLEARANCE;
    GraspOutcome {
        feasible,
        width,
        contact_points: count,
    }
}

/// Point set indexed for repeated grasp checks. Each check only visits the
/// points near the finger axis, with the same result as a full scan.
#[derive(Debug, Clone)]
pub struct GraspScene {
    index: SegmentIndex,
    bounds: Aabb,
}

impl GraspScene {
    pub fn new(points: Vec<Vec3>) -> Self {
        let index = SegmentIndex::new(points);
        let bounds = index.bounds();
        GraspScene { index, bounds }
    }

    pub fn points(&self) -> &[Vec3] {
        self.index.points()
    }

    /// Replaces `out` with every point that can lie in the pad cross-section
    /// of any roll about `axis` at `anchor`, at or behind the outer finger body.
    pub fn gather(&self, anchor: Vec3, axis: Vec3, gripper: &GripperModel, out: &mut Vec<Vec3>, ids: &mut Vec<u32>) {
        out.clear();
        ids.clear();
        if self.bounds.is_empty() {
            return;
        }
        let top = OUTER_JAW_OFFSET + gripper.finger_body_thickness;
        let mut far = 0.0f64;
        for k in 0..8 {
            let c = Vec3::new(
                if k & 1 == 0 { self.bounds.min.x } else { self.bounds.max.x },
                if k & 2 == 0 { self.bounds.min.y } else { self.bounds.max.y },
                if k & 4 == 0 { self.bounds.min.z } else { self.bounds.max.z },
            );
            far = far.max((anchor - c).dot(axis));
        }
        let hw = gripper.finger_pad_width / 2.0;
        let hh = gripper.finger_pad_height / 2.0;
        let reach = libm::sqrt(hw * hw + hh * hh) * (1.0 + 1e-9) + 1e-12;
        self.index.near_segment(anchor + axis * top, anchor - axis * (far + reach), reach, ids);
        let pts = self.index.points();
        out.extend(ids.iter().map(|&i| pts[i as usize]));
    }

    pub fn evaluate(&self, pose: &GraspPose, gripper: &GripperModel) -> GraspOutcome {
        let (mut local, mut ids) = (Vec::new(), Vec::new());
        self.gather(pose.anchor(), pose.finger_axis(), gripper, &mut local, &mut ids);
        evaluate_grasp(pose, &local, gripper)
    }
}

/// Per-pixel unit normals of a depth layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    width: usize,
    height: usize,
    normals: Vec<Option<Vec3>>,
}

impl NormalMap {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, u: usize, v: usize) -> Option<Vec3> {
        self.normals[v * self.width + u]
    }

    pub fn valid_count(&self) -> usize {
        self.normals.iter().filter(|n| n.is_some()).count()
    }
}

/// Central-difference normals oriented toward the camera. Pixels without all
/// four axis neighbors valid get no normal.
pub fn estimate_normals(entry: &DepthImage, cam: &CameraModel) -> NormalMap {
    let (w, h) = entry.dims();
    let point = |u: usize, v: usize| entry.depth(u, v).map(|z| cam.backproject_unchecked(u as f64, v as f64, z));
    let mut normals = vec![None; w * h];
    for v in 1..h.saturating_sub(1) {
        for u in 1..w.saturating_sub(1) {
            let (Some(p), Some(l), Some(r), Some(t), Some(b)) =
                (point(u, v), point(u - 1, v), point(u + 1, v), point(u, v - 1), point(u, v + 1))
            else {
                continue;
            };
            let Some(n) = (r - l).cross(b - t).normalized() else {
                continue;
            };
            normals[v * w + u] = Some(if n.dot(-p) > 0.0 { n } else { -n });
        }
    }
    NormalMap {
        width: w,
        height: h,
        normals,
    }
}

/// Volume centroid of a reconstruction, falling back to the area-weighted
/// surface centroid when the enclosed volume is degenerate. `None` only for a
/// mesh without area.
pub fn center_of_geometry(recon: &TriangleMesh) -> Option<Vec3> {
    match mesh_volume_centroid(recon) {
        Ok((_, c)) => Some(c),
        Err(_) => surface_centroid(recon),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspCandidate {
    pub pose: GraspPose,
    pub pixel: (usize, usize),
    pub feasible: bool,
    /// Meaningful only when feasible; 0 otherwise.
    pub width: f64,
    /// In `[0, 1]`; 0 when infeasible.
    pub quality: f64,
    pub contact_points: usize,
}

/// Feasibility, quality and width rasters aligned to the entry layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspMaps {
    pub mask: Mask,
    pub feasible: Vec<bool>,
    pub quality: Vec<f64>,
    /// Required opening in meters; 0 where infeasible.
    pub width: Vec<f64>,
    /// One entry per anchor and roll, anchors in raster order.
    pub candidates: Vec<GraspCandidate>,
    /// Center used for quality; `None` when the shell is empty.
    pub center: Option<Vec3>,
}

impl GraspMaps {
    pub fn empty(width: usize, height: usize) -> Self {
        GraspMaps {
            mask: Mask::from_fn(width, height, |_, _| false),
            feasible: vec![false; width * height],
            quality: vec![0.0; width * height],
            width: vec![0.0; width * height],
            candidates: Vec::new(),
            center: None,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.mask.dims()
    }

    pub fn feasible_count(&self) -> usize {
        self.feasible.iter().filter(|&&f| f).count()
    }
}

/// Grasp maps of a shell against its own point cloud.
///
/// Anchors are the valid entry pixels with a normal whose coordinates are
/// both multiples of `stride`. Each anchor is tried at every roll; it is
/// feasible if any roll is, with the smallest feasible width. Quality falls
/// linearly from 1 at the feasible anchor closest to the center of geometry
/// to 0 at the farthest. Remaining mask pixels copy their nearest anchor
/// (ties to the earlier anchor in raster order).
pub fn compute_grasp_maps(shell: &ObjectShell, gripper: &GripperModel, stride: usize) -> Result<GraspMaps> {
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be at least 1"));
    }
    let (w, h) = shell.entry().dims();
    let mut maps = GraspMaps::empty(w, h);
    maps.mask = shell.mask();
    let Ok(recon) = stitch_shell(shell, DEFAULT_DISCONTINUITY) else {
        return Ok(maps);
    };
    let center = center_of_geometry(&recon);
    maps.center = center;
    let scene = GraspScene::new(shell_to_pointcloud(shell).points().to_vec());
    let normals = estimate_normals(shell.entry(), shell.camera());

    struct Anchor {
        pixel: (usize, usize),
        feasible: bool,
        width: f64,
        quality: f64,
    }
    let (mut local, mut ids) = (Vec::new(), Vec::new());
    let mut anchors = Vec::new();
    for v in (0..h).step_by(stride) {
        for u in (0..w).step_by(stride) {
            let (Some(z), Some(n)) = (shell.entry().depth(u, v), normals.get(u, v)) else {
                continue;
            };
            let p = shell.camera().backproject_unchecked(u as f64, v as f64, z);
            scene.gather(p, n, gripper, &mut local, &mut ids);
            let mut best: Option<f64> = None;
            for k in 0..ROLLS {
                let pose = GraspPose::new(p, n, k).expect("unit normal and roll in range");
                let o = evaluate_grasp(&pose, &local, gripper);
                if o.feasible {
                    best = Some(best.map_or(o.width, |b: f64| b.min(o.width)));
                }
                maps.candidates.push(GraspCandidate {
                    pose,
                    pixel: (u, v),
                    feasible: o.feasible,
                    width: if o.feasible { o.width } else { 0.0 },
                    quality: 0.0,
                    contact_points: o.contact_points,
                });
            }
            anchors.push(Anchor {
                pixel: (u, v),
                feasible: best.is_some(),
                width: best.unwrap_or(0.0),
                quality: 0.0,
            });
        }
    }

    // Quality from distance to the center over the feasible anchors.
    if let Some(c) = center {
        let dist = |a: &Anchor| {
            let (u, v) = a.pixel;
            let z = shell.entry().depth(u, v).expect("anchor pixels are valid");
            shell.camera().backproject_unchecked(u as f64, v as f64, z).distance(c)
        };
        let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for a in anchors.iter().filter(|a| a.feasible) {
            let d = dist(a);
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        for a in anchors.iter_mut().filter(|a| a.feasible) {
            a.quality = if dmax > dmin { (dmax - dist(a)) / (dmax - dmin) } else { 1.0 };
        }
        let mut k = 0;
        for a in &anchors {
            for cand in &mut maps.candidates[k..k + ROLLS as usize] {
                if cand.feasible {
                    cand.quality = a.quality;
                }
            }
            k += ROLLS as usize;
        }
    }

    if anchors.is_empty() {
        return Ok(maps);
    }
    let tree = KdTree::new(anchors.iter().map(|a| Vec3::new(a.pixel.0 as f64, a.pixel.1 as f64, 0.0)).collect());
    for v in 0..h {
        for u in 0..w {
            if !maps.mask.get(u, v) {
                continue;
            }
            let (i, _) = tree.nearest(Vec3::new(u as f64, v as f64, 0.0)).expect("non-empty tree");
            let a = &anchors[i];
            let idx = v * w + u;
            maps.feasible[idx] = a.feasible;
            maps.quality[idx] = a.quality;
            maps.width[idx] = a.width;
        }
    }
    Ok(maps)
}

/// Feasibility of `candidates` re-checked against `points` with an opening
/// of each candidate's width plus `clearance`. `None` when no candidate is
/// feasible.
pub fn grasp_precision_points(
    candidates: &[GraspCandidate],
    points: &PointCloud,
    gripper: &GripperModel,
    clearance: f64,
) -> Option<f64> {
    let scene = GraspScene::new(points.points().to_vec());
    let mut total = 0usize;
    let mut kept = 0usize;
    for c in candidates.iter().filter(|c| c.feasible) {
        total += 1;
        let Ok(g) = gripper.with_opening(c.width + clearance) else {
            continue;
        };
        if scene.evaluate(&c.pose, &g).feasible {
            kept += 1;
        }
    }
    (total > 0).then(|| kept as f64 / total as f64)
}
