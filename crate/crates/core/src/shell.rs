use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::raster::{DepthImage, Mask};

/// Entry/exit depth pair seen from one camera.
///
/// Both layers share a mask and every valid pixel has `entry <= exit`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectShell {
    entry: DepthImage,
    exit: DepthImage,
    camera: CameraModel,
}

impl ObjectShell {
    pub fn new(entry: DepthImage, exit: DepthImage, camera: CameraModel) -> Result<Self> {
        let cam_dims = (camera.width(), camera.height());
        for layer in [&entry, &exit] {
            if layer.dims() != cam_dims {
                return Err(Error::SizeMismatch {
                    expected: cam_dims,
                    found: layer.dims(),
                });
            }
        }
        for v in 0..entry.height() {
            for u in 0..entry.width() {
                match (entry.depth(u, v), exit.depth(u, v)) {
                    (None, None) => {}
                    (Some(a), Some(b)) => {
                        if a > b {
                            return Err(Error::ShellDepthOrder { u, v });
                        }
                    }
                    _ => return Err(Error::ShellMaskMismatch { u, v }),
                }
            }
        }
        Ok(ObjectShell {
            entry,
            exit,
            camera,
        })
    }

    pub fn entry(&self) -> &DepthImage {
        &self.entry
    }

    pub fn exit(&self) -> &DepthImage {
        &self.exit
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    pub fn mask(&self) -> Mask {
        self.entry.mask()
    }

    pub fn valid_count(&self) -> usize {
        self.entry.valid_count()
    }

    pub fn into_layers(self) -> (DepthImage, DepthImage) {
        (self.entry, self.exit)
    }
}
