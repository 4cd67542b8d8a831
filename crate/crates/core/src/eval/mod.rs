//! Reconstruction and grasp metrics: Chamfer distance between sampled
//! surfaces, geometric grasp precision against a ground-truth mesh, and
//! feasibility/quality map agreement.

use alloc::vec::Vec;

use crate::datagen::RngStream;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::grasp::{grasp_precision_points, GraspCandidate, GraspMaps, GripperModel};
use crate::mesh::{PointCloud, TriangleMesh};
use crate::spatial::KdTree;

/// Default extra opening when re-checking grasps, meters.
pub const DEFAULT_CLEARANCE: f64 = 0.015;
/// Default surface samples per mesh for Chamfer.
pub const DEFAULT_CHAMFER_SAMPLES: usize = 10_000;
/// Ground-truth sampling density for grasp precision, points per m²
/// (one per mm²), clamped to the range below.
pub const PRECISION_DENSITY: f64 = 1e6;
pub const PRECISION_MIN_SAMPLES: usize = 20_000;
pub const PRECISION_MAX_SAMPLES: usize = 400_000;
/// Quality threshold of the high-quality RMSE.
pub const HIGH_QUALITY: f64 = 0.75;

/// `n` points uniform over the surface: triangles chosen proportionally to
/// area, then uniform barycentric coordinates.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, stream: &mut RngStream) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be positive"));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles().len());
    let mut total = 0.0;
    for t in 0..mesh.triangles().len() {
        total += mesh.triangle_area(t);
        cumulative.push(total);
    }
    if total.is_nan() || total <= 0.0 {
        return Err(Error::EmptyMesh);
    }
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = stream.uniform(0.0, total);
        let t = cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1);
        let [a, b, c] = mesh.corners(t);
        let s = libm::sqrt(stream.uniform(0.0, 1.0));
        let r = stream.uniform(0.0, 1.0);
        points.push(a * (1.0 - s) + b * (s * (1.0 - r)) + c * (s * r));
    }
    Ok(PointCloud::new(points))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChamferVariant {
    /// Mean nearest-neighbor distance.
    #[default]
    Mean,
    /// Mean squared nearest-neighbor distance.
    MeanSquared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamferResult {
    /// From `a` to its nearest points in `b`.
    pub forward: f64,
    pub backward: f64,
    pub sum: f64,
}

pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<ChamferResult> {
    chamfer_with(a, b, ChamferVariant::Mean)
}

pub fn chamfer_with(a: &PointCloud, b: &PointCloud, variant: ChamferVariant) -> Result<ChamferResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointCloud);
    }
    let ta = KdTree::new(a.points().to_vec());
    let tb = KdTree::new(b.points().to_vec());
    let forward = directed(a.points(), &tb, variant);
    let backward = directed(b.points(), &ta, variant);
    Ok(ChamferResult {
        forward,
        backward,
        sum: forward + backward,
    })
}

fn directed(from: &[Vec3], to: &KdTree, variant: ChamferVariant) -> f64 {
    let mut acc = 0.0;
    for &p in from {
        let (_, d2) = to.nearest(p).expect("non-empty tree");
        acc += match variant {
            ChamferVariant::Mean => libm::sqrt(d2),
            ChamferVariant::MeanSquared => d2,
        };
    }
    acc / from.len() as f64
}

/// Chamfer between `samples`-point surface samplings of two meshes. Both
/// samplings start from the same stream, so identical meshes give identical
/// clouds and an exact zero.
pub fn chamfer_meshes(
    a: &TriangleMesh,
    b: &TriangleMesh,
    samples: usize,
    seed: u64,
    variant: ChamferVariant,
) -> Result<ChamferResult> {
    let root = RngStream::new(seed);
    let pa = sample_surface(a, samples, &mut root.derive("chamfer", 0))?;
    let pb = sample_surface(b, samples, &mut root.derive("chamfer", 0))?;
    chamfer_with(&pa, &pb, variant)
}

/// Dense ground-truth sample count for a mesh of `area` m².
pub fn precision_sample_count(area: f64) -> usize {
    let n = libm::ceil(area * PRECISION_DENSITY);
    (n as usize).clamp(PRECISION_MIN_SAMPLES, PRECISION_MAX_SAMPLES)
}

/// Fraction of feasible candidates that stay feasible against dense
/// samples of `gt` with the opening widened to `width + clearance`.
/// `None` when no candidate is feasible.
pub fn grasp_precision(
    candidates: &[GraspCandidate],
    gt: &TriangleMesh,
    gripper: &GripperModel,
    clearance: f64,
    seed: u64,
) -> Result<Option<f64>> {
    if !candidates.iter().any(|c| c.feasible) {
        return Ok(None);
    }
    let n = precision_sample_count(gt.surface_area());
    let cloud = sample_surface(gt, n, &mut RngStream::new(seed).derive("precision", 0))?;
    Ok(grasp_precision_points(candidates, &cloud, gripper, clearance))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapMetrics {
    pub accuracy: f64,
    pub f1: f64,
    pub quality_rmse: f64,
    /// Over ground-truth pixels with quality ≥ 0.75; 0 when there are none.
    pub quality_rmse_high: f64,
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub true_negative: usize,
    /// Ground-truth pixels with quality ≥ 0.75.
    pub high_count: usize,
}

/// Feasibility agreement over the ground-truth mask plus every pixel the
/// prediction calls feasible (so feasibility outside the object counts as a
/// false positive); quality errors over the ground-truth mask.
pub fn map_metrics(pred: &GraspMaps, gt: &GraspMaps) -> Result<MapMetrics> {
    let (w, h) = gt.dims();
    if pred.dims() != (w, h) {
        return Err(Error::SizeMismatch {
            expected: (w, h),
            found: pred.dims(),
        });
    }
    let n = w * h;
    for m in [pred, gt] {
        if m.feasible.len() != n || m.quality.len() != n {
            return Err(Error::RasterLength {
                expected: n,
                found: m.feasible.len().min(m.quality.len()),
            });
        }
    }
    let mask = gt.mask.bits();
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    let (mut se, mut count, mut se_high, mut high) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..n {
        let (p, g) = (pred.feasible[i], gt.feasible[i]);
        if !mask[i] && !p {
            continue;
        }
        match (p, g && mask[i]) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
        if mask[i] {
            let d = pred.quality[i] - gt.quality[i];
            se += d * d;
            count += 1;
            if gt.quality[i] >= HIGH_QUALITY {
                se_high += d * d;
                high += 1;
            }
        }
    }
    let total = tp + fp + fn_ + tn;
    let accuracy = if total == 0 { 1.0 } else { (tp + tn) as f64 / total as f64 };
    let f1 = if tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    };
    let rms = |s: f64, k: usize| if k == 0 { 0.0 } else { libm::sqrt(s / k as f64) };
    Ok(MapMetrics {
        accuracy,
        f1,
        quality_rmse: rms(se, count),
        quality_rmse_high: rms(se_high, high),
        true_positive: tp,
        false_positive: fp,
        false_negative: fn_,
        true_negative: tn,
        high_count: high,
    })
}
