//! Shell to point cloud and shell to closed mesh.
//!
//! Both layers are triangulated on the pixel grid and the outer walls are
//! closed by walking each mask contour and bridging entry to exit. Every
//! step touches a pixel a bounded number of times, so the whole stitch is
//! linear in the number of valid pixels.

mod contour;

use alloc::vec::Vec;

pub use contour::{trace_all, trace_boundary, trace_holes, BoundaryContour, ContourKind};

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::{PointCloud, TriangleMesh};
use crate::raster::DepthImage;
use crate::shell::ObjectShell;

/// Default maximum depth gap inside one layer triangle, meters.
pub const DEFAULT_DISCONTINUITY: f64 = 0.02;

/// Which side of the shell a layer is; decides triangle winding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    /// Faces the camera.
    Entry,
    /// Faces away from the camera.
    Exit,
}

/// Backprojected entry points followed by exit points, each in raster order.
pub fn shell_to_pointcloud(shell: &ObjectShell) -> PointCloud {
    let mut points = layer_points(shell.entry(), shell.camera());
    points.extend(layer_points(shell.exit(), shell.camera()));
    PointCloud::new(points)
}

fn layer_points(layer: &DepthImage, cam: &CameraModel) -> Vec<Vec3> {
    let (w, h) = layer.dims();
    let mut out = Vec::with_capacity(layer.valid_count());
    for v in 0..h {
        for u in 0..w {
            if let Some(z) = layer.depth(u, v) {
                out.push(cam.backproject_unchecked(u as f64, v as f64, z));
            }
        }
    }
    out
}

/// Camera-facing grid triangulation of one depth layer.
pub fn triangulate_layer(layer: &DepthImage, cam: &CameraModel, depth_discontinuity: f64) -> TriangleMesh {
    triangulate_layer_as(layer, cam, depth_discontinuity, Layer::Entry)
}

/// Grid triangulation with the winding of `side`.
///
/// A 2×2 block with four valid pixels whose pairwise depth gaps are all below
/// `depth_discontinuity` yields two triangles split along the ↘ diagonal. A
/// block with exactly three valid pixels yields their triangle under the
/// same gap rule, so the mesh border follows diagonal steps of the mask
/// contour instead of a staircase.
pub fn triangulate_layer_as(layer: &DepthImage, cam: &CameraModel, depth_discontinuity: f64, side: Layer) -> TriangleMesh {
    let (index, count) = pixel_index(layer);
    let vertices = layer_points(layer, cam);
    debug_assert_eq!(vertices.len(), count);
    let mut triangles = Vec::new();
    grid_triangles(layer, &index, 0, depth_discontinuity, side, &mut triangles);
    TriangleMesh::new(vertices, triangles).expect("grid indices are in range")
}

/// Compact vertex number of each valid pixel, `u32::MAX` elsewhere.
fn pixel_index(layer: &DepthImage) -> (Vec<u32>, usize) {
    let mut next = 0u32;
    let index = layer
        .data()
        .iter()
        .map(|&z| {
            if z > 0.0 {
                next += 1;
                next - 1
            } else {
                u32::MAX
            }
        })
        .collect();
    (index, next as usize)
}

fn grid_triangles(
    layer: &DepthImage,
    index: &[u32],
    base: u32,
    disc: f64,
    side: Layer,
    out: &mut Vec<[u32; 3]>,
) {
    let (w, h) = layer.dims();
    if w < 2 || h < 2 {
        return;
    }
    let z = layer.data();
    let close = |px: &[usize]| {
        px.iter().all(|&a| px.iter().all(|&b| ((z[a] - z[b]) as f64).abs() < disc))
    };
    // Entry triangles have negative signed area in (u, v); exit positive.
    let mut emit = |a: usize, b: usize, c: usize| {
        let (ia, ib, ic) = (base + index[a], base + index[b], base + index[c]);
        match side {
            Layer::Entry => out.push([ia, ib, ic]),
            Layer::Exit => out.push([ia, ic, ib]),
        }
    };
    for v in 0..h - 1 {
        for u in 0..w - 1 {
            let tl = v * w + u;
            let (tr, bl, br) = (tl + 1, tl + w, tl + w + 1);
            let valid = [z[tl] > 0.0, z[tr] > 0.0, z[bl] > 0.0, z[br] > 0.0];
            match valid {
                [true, true, true, true] => {
                    if close(&[tl, tr, bl, br]) {
                        emit(tl, br, tr);
                        emit(tl, bl, br);
                    }
                }
                [false, true, true, true] => {
                    if close(&[tr, bl, br]) {
                        emit(tr, bl, br);
                    }
                }
                [true, false, true, true] => {
                    if close(&[tl, bl, br]) {
                        emit(tl, bl, br);
                    }
                }
                [true, true, false, true] => {
                    if close(&[tl, br, tr]) {
                        emit(tl, br, tr);
                    }
                }
                [true, true, true, false] => {
                    if close(&[tl, bl, tr]) {
                        emit(tl, bl, tr);
                    }
                }
                _ => {}
            }
        }
    }
}

/// Closed mesh from a shell: both layer triangulations plus an entry-to-exit
/// wall along every outer and hole contour of the mask.
///
/// Vertices are the entry points then the exit points, as produced by
/// [`shell_to_pointcloud`]. Zero-area wall triangles (where entry equals
/// exit) are dropped.
pub fn stitch_shell(shell: &ObjectShell, depth_discontinuity: f64) -> Result<TriangleMesh> {
    let entry = shell.entry();
    let exit = shell.exit();
    let (index, n) = pixel_index(entry);
    if n == 0 {
        return Err(Error::EmptyShell);
    }
    let w = entry.width();
    let cam = shell.camera();
    let mut vertices = layer_points(entry, cam);
    vertices.extend(layer_points(exit, cam));

    let mut triangles = Vec::with_capacity(4 * n);
    grid_triangles(entry, &index, 0, depth_discontinuity, Layer::Entry, &mut triangles);
    grid_triangles(exit, &index, n as u32, depth_discontinuity, Layer::Exit, &mut triangles);

    let n = n as u32;
    for c in trace_all(&entry.mask()) {
        let px = &c.pixels;
        if px.len() < 2 {
            continue;
        }
        for i in 0..px.len() {
            let (a, b) = (px[i], px[(i + 1) % px.len()]);
            let ea = index[a.1 * w + a.0];
            let eb = index[b.1 * w + b.0];
            let (xa, xb) = (ea + n, eb + n);
            triangles.push([ea, eb, xb]);
            triangles.push([ea, xb, xa]);
        }
    }
    TriangleMesh::new(vertices, triangles)
}

/// Upper bound on stitched triangles: two per valid pixel per layer plus two
/// per contour step.
pub fn stitch_triangle_bound(shell: &ObjectShell) -> usize {
    let boundary: usize = trace_all(&shell.mask()).iter().map(|c| c.len()).sum();
    2 * shell.valid_count() * 2 + 2 * boundary
}

/// Enclosed volume (m³) and volume centroid by signed tetrahedra.
///
/// Outward-facing (counter-clockwise seen from outside) windings give a
/// positive volume. Fails with [`Error::DegenerateVolume`] below 1e-9 m³ in
/// magnitude.
pub fn mesh_volume_centroid(mesh: &TriangleMesh) -> Result<(f64, Vec3)> {
    if mesh.triangles().is_empty() {
        return Err(Error::DegenerateVolume { volume: 0.0 });
    }
    // Tetrahedra fan from a nearby reference point to limit cancellation.
    let r = mesh.vertex_bounds().center();
    let mut six_vol = 0.0;
    let mut moment = Vec3::ZERO;
    for t in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.corners(t);
        let (a, b, c) = (a - r, b - r, c - r);
        let d = a.dot(b.cross(c));
        six_vol += d;
        moment += (a + b + c) * d;
    }
    let volume = six_vol / 6.0;
    if !(volume.abs() >= 1e-9) {
        return Err(Error::DegenerateVolume { volume });
    }
    Ok((volume, r + moment / (4.0 * six_vol)))
}

/// Area-weighted mean of triangle centroids; `None` for a mesh without area.
pub fn surface_centroid(mesh: &TriangleMesh) -> Option<Vec3> {
    let mut total = 0.0;
    let mut acc = Vec3::ZERO;
    for t in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.corners(t);
        let area = crate::mesh::triangle_area(a, b, c);
        total += area;
        acc += (a + b + c) * (area / 3.0);
    }
    (total > 0.0).then(|| acc / total)
}

#[cfg(test)]
mod tests;
