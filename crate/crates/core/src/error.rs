use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Error {
    #[error("behind camera: point depth {z} is not positive")]
    BehindCamera { z: f64 },

    #[error("invalid depth {z}")]
    InvalidDepth { z: f64 },

    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),

    #[error("raster size mismatch: expected {expected:?}, found {found:?}")]
    SizeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("raster data has {found} values, expected {expected}")]
    RasterLength { expected: usize, found: usize },

    #[error("entry and exit masks differ at pixel ({u}, {v})")]
    ShellMaskMismatch { u: usize, v: usize },

    #[error("entry depth exceeds exit depth at pixel ({u}, {v})")]
    ShellDepthOrder { u: usize, v: usize },

    #[error("non-finite depth at pixel ({u}, {v})")]
    NonFiniteDepth { u: usize, v: usize },

    #[error("triangle {triangle} references vertex {index} but the mesh has {vertex_count}")]
    VertexIndex {
        triangle: usize,
        index: u32,
        vertex_count: usize,
    },

    #[error("non-finite vertex {0}")]
    NonFiniteVertex(usize),

    #[error("empty mesh")]
    EmptyMesh,

    #[error("empty shell")]
    EmptyShell,

    #[error("empty point cloud")]
    EmptyPointCloud,

    #[error("normal {0} is not unit length")]
    NonUnitNormal(usize),

    #[error("normal count {normals} does not match point count {points}")]
    NormalCount { points: usize, normals: usize },

    #[error("degenerate volume {volume} m^3")]
    DegenerateVolume { volume: f64 },

    #[error("rotation is not orthonormal with determinant +1")]
    InvalidRotation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
