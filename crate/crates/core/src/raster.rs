//! Depth rasters and binary masks.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major depth raster in meters. Values `<= 0` mark invalid pixels.
///
/// Depths are stored as `f32`, the precision of the on-disk format, so that
/// writing and reading a raster is lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::RasterLength {
                expected: width * height,
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|d| !d.is_finite()) {
            return Err(Error::NonFiniteDepth {
                u: i % width.max(1),
                v: i / width.max(1),
            });
        }
        Ok(DepthImage {
            width,
            height,
            data,
        })
    }

    /// All-invalid raster.
    pub fn empty(width: usize, height: usize) -> Self {
        DepthImage {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    /// Builds a raster from per-pixel depths; `None`, non-finite and
    /// non-positive values become invalid.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Option<f64>) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                let d = match f(u, v) {
                    Some(z) if z.is_finite() && z > 0.0 => z as f32,
                    _ => 0.0,
                };
                data.push(if d > 0.0 { d } else { 0.0 });
            }
        }
        DepthImage {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    #[inline]
    pub fn raw(&self, u: usize, v: usize) -> f32 {
        self.data[v * self.width + u]
    }

    /// Depth of a valid pixel.
    #[inline]
    pub fn depth(&self, u: usize, v: usize) -> Option<f64> {
        let d = self.data[v * self.width + u];
        (d > 0.0).then_some(d as f64)
    }

    #[inline]
    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.data[v * self.width + u] > 0.0
    }

    pub fn mask(&self) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            bits: self.data.iter().map(|&d| d > 0.0).collect(),
        }
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|&&d| d > 0.0).count()
    }
}

/// Row-major binary raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::RasterLength {
                expected: width * height,
                found: bits.len(),
            });
        }
        Ok(Mask {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                bits.push(f(u, v));
            }
        }
        Mask {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[v * self.width + u]
    }

    /// Like [`get`](Self::get) but false outside the raster.
    #[inline]
    pub fn get_signed(&self, u: isize, v: isize) -> bool {
        u >= 0
            && v >= 0
            && (u as usize) < self.width
            && (v as usize) < self.height
            && self.bits[v as usize * self.width + u as usize]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        self.bits[v * self.width + u] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }
}
