use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;

use super::RngStream;
use crate::camera::CameraModel;
use crate::geometry::Vec3;
use crate::grasp::estimate_normals;
use crate::mesh::TriangleMesh;
use crate::raster::{DepthImage, Mask};

/// Vertex jitter and smoothing applied to meshes before rendering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrerenderParams {
    /// Range of the fraction of vertices that get jittered.
    pub subset: (f64, f64),
    /// Range of the per-vertex noise magnitude, meters.
    pub magnitude: (f64, f64),
    pub smoothing_rounds: usize,
    /// Step toward the 1-ring average per round.
    pub smoothing_lambda: f64,
}

impl Default for PrerenderParams {
    fn default() -> Self {
        PrerenderParams {
            subset: (0.3, 1.0),
            magnitude: (0.001, 0.010),
            smoothing_rounds: 3,
            smoothing_lambda: 0.5,
        }
    }
}

/// Sensor-style corruption of a rendered depth image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostrenderParams {
    pub multiplicative_sigma: f64,
    /// Meters.
    pub additive_sigma: f64,
    /// Dropout angle range in degrees.
    pub dropout_angle: (f64, f64),
    pub pepper_max: usize,
    pub erosion_rounds: (usize, usize),
    pub erosion_probability: f64,
    /// Leading erosion rounds run on the 2× downsampled mask.
    pub coarse_rounds: usize,
    pub exempt_max: usize,
}

impl Default for PostrenderParams {
    fn default() -> Self {
        PostrenderParams {
            multiplicative_sigma: 0.005,
            additive_sigma: 0.001,
            dropout_angle: (5.0, 20.0),
            pepper_max: 10,
            erosion_rounds: (5, 20),
            erosion_probability: 0.3,
            coarse_rounds: 3,
            exempt_max: 10,
        }
    }
}

/// Moves a random subset of vertices by per-axis uniform noise.
pub fn jitter_vertices(mesh: &TriangleMesh, stream: &mut RngStream, params: &PrerenderParams) -> TriangleMesh {
    let mut v = mesh.vertices().to_vec();
    let n = v.len();
    if n == 0 {
        return mesh.clone();
    }
    let fraction = stream.uniform(params.subset.0, params.subset.1);
    let count = ((fraction * n as f64).round() as usize).min(n);
    let mut chosen = index::sample(stream.rng(), n, count).into_vec();
    chosen.sort_unstable();
    for i in chosen {
        let m = stream.uniform(params.magnitude.0, params.magnitude.1);
        let d = Vec3::new(stream.uniform(-m, m), stream.uniform(-m, m), stream.uniform(-m, m));
        v[i] += d;
    }
    mesh.with_vertices(v).expect("bounded finite offsets")
}

/// Uniform-weight Laplacian smoothing over the 1-ring; topology unchanged.
pub fn laplacian_smooth(mesh: &TriangleMesh, rounds: usize, lambda: f64) -> TriangleMesh {
    let n = mesh.vertices().len();
    let mut ring: Vec<Vec<u32>> = vec![Vec::new(); n];
    for t in mesh.triangles() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            ring[a as usize].push(b);
            ring[b as usize].push(a);
        }
    }
    for r in &mut ring {
        r.sort_unstable();
        r.dedup();
    }
    let mut cur = mesh.vertices().to_vec();
    let mut next = cur.clone();
    for _ in 0..rounds {
        for (i, r) in ring.iter().enumerate() {
            if r.is_empty() {
                next[i] = cur[i];
                continue;
            }
            let mut sum = Vec3::ZERO;
            for &j in r {
                sum += cur[j as usize];
            }
            let avg = sum / r.len() as f64;
            next[i] = cur[i] + (avg - cur[i]) * lambda;
        }
        core::mem::swap(&mut cur, &mut next);
    }
    mesh.with_vertices(cur).expect("averages of finite positions")
}

pub fn prerender_augment(mesh: &TriangleMesh, stream: &mut RngStream, params: &PrerenderParams) -> TriangleMesh {
    laplacian_smooth(&jitter_vertices(mesh, stream, params), params.smoothing_rounds, params.smoothing_lambda)
}

/// One border-erosion round.
#[derive(Debug, Clone, PartialEq)]
pub struct ErosionRound {
    pub coarse: bool,
    /// Mask the round started from, at the round's resolution.
    pub before: Mask,
    /// Border pixels of `before` (raster indices at the round's resolution).
    pub border: Vec<u32>,
    /// Removed border pixels, same indexing as `border`.
    pub removed: Vec<u32>,
    /// Full-resolution pixels invalidated by this round.
    pub fine_removed: Vec<u32>,
}

/// Record of every random decision of [`postrender_augment_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentTrace {
    /// Depth after the noise step, before any removal.
    pub noisy: DepthImage,
    pub theta_deg: f64,
    pub angle_removed: Vec<u32>,
    pub pepper_removed: Vec<u32>,
    pub erosion: Vec<ErosionRound>,
    pub exempted: Vec<u32>,
}

impl AugmentTrace {
    /// All removed full-resolution pixels, in removal order.
    pub fn removed(&self) -> Vec<u32> {
        let mut all = self.angle_removed.clone();
        all.extend_from_slice(&self.pepper_removed);
        for r in &self.erosion {
            all.extend_from_slice(&r.fine_removed);
        }
        all
    }
}

pub fn postrender_augment(
    depth: &DepthImage,
    cam: &CameraModel,
    stream: &mut RngStream,
    params: &PostrenderParams,
) -> DepthImage {
    postrender_augment_traced(depth, cam, stream, params).0
}

/// Noise, angle dropout, pepper, border erosion, then exemption. Angles
/// come from the clean input's central-difference normals; pixels lacking
/// a full 4-neighborhood have no normal and are never dropped by angle.
pub fn postrender_augment_traced(
    depth: &DepthImage,
    cam: &CameraModel,
    stream: &mut RngStream,
    params: &PostrenderParams,
) -> (DepthImage, AugmentTrace) {
    let (w, h) = depth.dims();
    let n = w * h;

    // (1) noise
    let mut noisy = depth.data().to_vec();
    for z in &mut noisy {
        if *z > 0.0 {
            let m = 1.0 + params.multiplicative_sigma * stream.standard_normal();
            let a = params.additive_sigma * stream.standard_normal();
            let d = (*z as f64) * m + a;
            // Noise never invalidates a pixel.
            *z = if d > 0.0 { d as f32 } else { f32::MIN_POSITIVE };
        }
    }
    let noisy = DepthImage::new(w, h, noisy).expect("finite noisy depths");
    let mut valid: Vec<bool> = noisy.data().iter().map(|&z| z > 0.0).collect();

    // (2) angle dropout
    let theta_deg = stream.uniform(params.dropout_angle.0, params.dropout_angle.1);
    let limit = (90.0 - theta_deg).to_radians();
    let cos_limit = libm::cos(limit);
    let normals = estimate_normals(depth, cam);
    let mut angle_removed = Vec::new();
    for v in 0..h {
        for u in 0..w {
            let i = v * w + u;
            if !valid[i] {
                continue;
            }
            let (Some(nrm), Some(z)) = (normals.get(u, v), depth.depth(u, v)) else {
                continue;
            };
            let Some(view) = (-(cam.pixel_ray(u, v) * z)).normalized() else {
                continue;
            };
            // angle > limit  ⇔  cos(angle) < cos(limit)
            if nrm.dot(view) < cos_limit {
                valid[i] = false;
                angle_removed.push(i as u32);
            }
        }
    }

    // (3) pepper
    let k = stream.int_inclusive(0, params.pepper_max);
    let candidates: Vec<u32> = (0..n as u32).filter(|&i| valid[i as usize]).collect();
    let take = k.min(candidates.len());
    let mut pepper_removed: Vec<u32> = index::sample(stream.rng(), candidates.len(), take)
        .into_iter()
        .map(|j| candidates[j])
        .collect();
    pepper_removed.sort_unstable();
    for &i in &pepper_removed {
        valid[i as usize] = false;
    }

    // (4) border erosion
    let rounds = stream.int_inclusive(params.erosion_rounds.0, params.erosion_rounds.1);
    let coarse_rounds = params.coarse_rounds.min(rounds);
    let mut erosion = Vec::with_capacity(rounds);
    for r in 0..rounds {
        let coarse = r < coarse_rounds;
        let before = if coarse {
            let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
            Mask::from_fn(cw, ch, |cu, cv| {
                (0..2).any(|dv| {
                    (0..2).any(|du| {
                        let (u, v) = (2 * cu + du, 2 * cv + dv);
                        u < w && v < h && valid[v * w + u]
                    })
                })
            })
        } else {
            Mask::new(w, h, valid.clone()).expect("sized")
        };
        let border = border_pixels(&before);
        let mut removed = Vec::new();
        for &b in &border {
            if stream.bernoulli(params.erosion_probability) {
                removed.push(b);
            }
        }
        let mut fine_removed = Vec::new();
        if coarse {
            let cw = before.width();
            for &b in &removed {
                let (cu, cv) = (b as usize % cw, b as usize / cw);
                for dv in 0..2 {
                    for du in 0..2 {
                        let (u, v) = (2 * cu + du, 2 * cv + dv);
                        if u < w && v < h && valid[v * w + u] {
                            valid[v * w + u] = false;
                            fine_removed.push((v * w + u) as u32);
                        }
                    }
                }
            }
            fine_removed.sort_unstable();
        } else {
            for &b in &removed {
                valid[b as usize] = false;
            }
            fine_removed.clone_from(&removed);
        }
        erosion.push(ErosionRound {
            coarse,
            before,
            border,
            removed,
            fine_removed,
        });
    }

    let mut trace = AugmentTrace {
        noisy,
        theta_deg,
        angle_removed,
        pepper_removed,
        erosion,
        exempted: Vec::new(),
    };

    // (5) exemption
    let e = stream.int_inclusive(0, params.exempt_max);
    let removed = trace.removed();
    let take = e.min(removed.len());
    let mut exempted: Vec<u32> = index::sample(stream.rng(), removed.len(), take)
        .into_iter()
        .map(|j| removed[j])
        .collect();
    exempted.sort_unstable();
    for &i in &exempted {
        valid[i as usize] = true;
    }
    trace.exempted = exempted;

    let out: Vec<f32> = trace
        .noisy
        .data()
        .iter()
        .zip(&valid)
        .map(|(&z, &ok)| if ok { z } else { 0.0 })
        .collect();
    (DepthImage::new(w, h, out).expect("sized"), trace)
}

/// Valid pixels with at least one invalid 8-neighbor inside the image.
pub(crate) fn border_pixels(mask: &Mask) -> Vec<u32> {
    let (w, h) = mask.dims();
    let mut out = Vec::new();
    for v in 0..h {
        for u in 0..w {
            if !mask.get(u, v) {
                continue;
            }
            let mut edge = false;
            'n: for dv in -1isize..=1 {
                for du in -1isize..=1 {
                    if du == 0 && dv == 0 {
                        continue;
                    }
                    let (nu, nv) = (u as isize + du, v as isize + dv);
                    if nu < 0 || nv < 0 || nu >= w as isize || nv >= h as isize {
                        continue;
                    }
                    if !mask.get(nu as usize, nv as usize) {
                        edge = true;
                        break 'n;
                    }
                }
            }
            if edge {
                out.push((v * w + u) as u32);
            }
        }
    }
    out
}
