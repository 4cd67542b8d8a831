//! Synthetic training data: random primitive shapes, random placements,
//! mesh perturbation before rendering and sensor-like depth corruption after.
//!
//! All randomness flows from [`RngStream`]s derived by hashing a parent seed
//! with a label and an index, so every sample is a pure function of the
//! dataset seed and its position.

mod augment;
mod shape;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

pub use augment::{
    jitter_vertices, laplacian_smooth, postrender_augment, postrender_augment_traced, prerender_augment, AugmentTrace,
    ErosionRound, PostrenderParams, PrerenderParams,
};
pub use shape::{
    build_shape, gen_shape, place_shape, place_shape_with, sample_shape_spec, BaseShape, Modifier, ShapeSpec, MAX_RATIO,
    MAX_SIDE, MIN_SIDE, PLACEMENT_CENTER, PLACEMENT_RADIUS,
};

use crate::camera::CameraModel;
use crate::error::Result;
use crate::geometry::{Pose, Quat};
use crate::grasp::{compute_grasp_maps, GraspMaps, GripperModel};
use crate::raster::DepthImage;
use crate::raycast::extract_shell;
use crate::shell::ObjectShell;

/// Deterministic random stream with hash-derived children.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Seed of the child `(label, index)` of `seed`: the first 8 bytes
    /// (little-endian) of SHA-256 over `seed‖label‖0‖index`.
    pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(label.as_bytes());
        h.update([0u8]);
        h.update(index.to_le_bytes());
        let digest = h.finalize();
        let mut b = [0u8; 8];
        b.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(b)
    }

    /// Independent child stream; does not advance `self`.
    pub fn derive(&self, label: &str, index: u64) -> RngStream {
        RngStream::new(Self::derive_seed(self.seed, label, index))
    }

    /// Uniform in `[lo, hi)`; `lo` when the range is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.rng.random_range(lo..hi)
        } else {
            lo
        }
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        if hi > lo {
            self.rng.random_range(lo..=hi)
        } else {
            lo
        }
    }

    /// Uniform index in `0..n`, `n > 0`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform rotation (Shoemake's subgroup algorithm).
    pub fn unit_quaternion(&mut self) -> Quat {
        let u1: f64 = self.rng.random();
        let u2: f64 = self.rng.random();
        let u3: f64 = self.rng.random();
        let (a, b) = (libm::sqrt(1.0 - u1), libm::sqrt(u1));
        let (t2, t3) = (core::f64::consts::TAU * u2, core::f64::consts::TAU * u3);
        Quat {
            w: b * libm::cos(t3),
            x: a * libm::sin(t2),
            y: a * libm::cos(t2),
            z: b * libm::sin(t3),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Everything needed to turn `(shape_seed, view_seed)` into a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub camera: CameraModel,
    pub gripper: GripperModel,
    pub stride: usize,
    pub prerender: PrerenderParams,
    pub postrender: PostrenderParams,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            camera: CameraModel::vga(),
            gripper: GripperModel::default(),
            stride: 4,
            prerender: PrerenderParams::default(),
            postrender: PostrenderParams::default(),
        }
    }
}

/// One rendered training example.
#[derive(Debug, Clone)]
pub struct Sample {
    pub shape_seed: u64,
    pub view_seed: u64,
    pub spec: ShapeSpec,
    /// Placement of the shape's bounding-box center frame in the camera frame.
    pub pose: Pose,
    /// Ground-truth shell of the perturbed, placed mesh.
    pub shell: ObjectShell,
    /// Corrupted entry layer: the network-style input.
    pub input: DepthImage,
    pub maps: GraspMaps,
}

/// Seeds of view `view` of shape `shape` in a dataset seeded with `seed`.
pub fn sample_seeds(seed: u64, shape: u64, view: u64, views_per_shape: u64) -> (u64, u64) {
    (
        RngStream::derive_seed(seed, "shape", shape),
        RngStream::derive_seed(seed, "view", shape * views_per_shape + view),
    )
}

/// Shape → placement → mesh perturbation → ray-cast shell → depth
/// corruption → grasp maps on the clean shell.
pub fn generate_sample(config: &SampleConfig, shape_seed: u64, view_seed: u64) -> Result<Sample> {
    let shape_stream = RngStream::new(shape_seed);
    let spec = sample_shape_spec(&mut shape_stream.derive("spec", 0));
    let mesh = build_shape(&spec);

    let view = RngStream::new(view_seed);
    let (placed, pose) = place_shape(&mesh, &mut view.derive("place", 0));
    let perturbed = prerender_augment(&placed, &mut view.derive("prerender", 0), &config.prerender);
    let shell = extract_shell(&perturbed, &config.camera);
    let input = postrender_augment(shell.entry(), &config.camera, &mut view.derive("postrender", 0), &config.postrender);
    let maps = compute_grasp_maps(&shell, &config.gripper, config.stride)?;
    Ok(Sample {
        shape_seed,
        view_seed,
        spec,
        pose,
        shell,
        input,
        maps,
    })
}
