//! 2D observations consumed by the fitter.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::Point2;

use crate::error::{CoreError, Result};

/// One annotated keypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedKeypoint {
    pub position: Point2<f64>,
    pub visible: bool,
}

/// Keypoints plus optional silhouette for one sighting.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub image_size: (usize, usize),
    pub keypoints: Vec<ObservedKeypoint>,
    /// Row-major binary mask at `image_size`, foreground = animal.
    pub silhouette: Option<Vec<bool>>,
    /// (x1, y1, x2, y2) in pixels.
    pub bbox: [f64; 4],
}

impl Observation {
    pub fn validate(&self) -> Result<()> {
        let [x1, y1, x2, y2] = self.bbox;
        if !(x1 < x2 && y1 < y2) {
            return Err(CoreError::Input(format!("invalid bbox {:?}", self.bbox)));
        }
        let (w, h) = (self.image_size.0 as f64, self.image_size.1 as f64);
        for (i, kp) in self.keypoints.iter().enumerate() {
            if kp.visible
                && !(kp.position.x >= 0.0
                    && kp.position.x <= w
                    && kp.position.y >= 0.0
                    && kp.position.y <= h)
            {
                return Err(CoreError::Input(format!(
                    "visible keypoint {i} at {:?} outside image {w}x{h}",
                    kp.position
                )));
            }
        }
        if let Some(mask) = &self.silhouette {
            if mask.len() != self.image_size.0 * self.image_size.1 {
                return Err(CoreError::Dimension(format!(
                    "mask has {} entries for image {:?}",
                    mask.len(),
                    self.image_size
                )));
            }
        }
        Ok(())
    }

    pub fn visible_count(&self) -> usize {
        self.keypoints.iter().filter(|k| k.visible).count()
    }
}
