//! Object shell geometry.
//!
//! An object shell is a pair of depth images rendered from one camera: the
//! *entry* layer holds the first surface hit along every camera ray and the
//! *exit* layer holds the last one. This crate builds everything around that
//! representation without any learning:
//!
//! - [`raycast`]: BVH ray casting, depth rendering and ground-truth shell extraction.
//! - [`shellmesh`]: shell to point cloud, layer triangulation, contour tracing and
//!   the linear-time entry/exit stitch into a closed mesh.
//! - [`grasp`]: parallel-jaw grasp feasibility, width and quality maps.
//! - [`datagen`]: randomized primitive shapes, placements and depth augmentations.
//! - [`eval`]: Chamfer distance, grasp precision and grasp-map metrics.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the dataset
//! writer and the command-line tool live in the `objshell` crate.
//!
//! Frames: everything lives in the camera frame, +Z along the optical axis,
//! +X right and +Y down. Lengths are meters.

#![no_std]
#![warn(rust_2018_idioms, unused_qualifications, missing_copy_implementations)]

extern crate alloc;

pub mod camera;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod grasp;
pub mod mesh;
pub mod primitives;
pub mod raster;
pub mod raycast;
pub mod shell;
pub mod shellmesh;
pub mod spatial;

pub use camera::CameraModel;
pub use error::{Error, Result};
pub use geometry::{Aabb, Mat3, Pose, Quat, Vec3};
pub use mesh::{PointCloud, TriangleMesh};
pub use raster::{DepthImage, Mask};
pub use shell::ObjectShell;
