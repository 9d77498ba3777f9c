//! Triangle mesh with a UV atlas and designated keypoint vertices.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{Point2, Point3};

use crate::error::{CoreError, Result};

/// Triangulated mesh in model units.
///
/// `uv` holds one texture coordinate per vertex in `[0,1]^2`;
/// `keypoint_ids` designates the vertices used as 2D keypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub uv: Vec<Point2<f64>>,
    pub keypoint_ids: Vec<usize>,
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn extent(&self) -> nalgebra::Vector3<f64> {
        self.max - self.min
    }
}

impl Mesh {
    /// Validate the type invariants: face indices in range, per-vertex uv
    /// within `[0,1]^2`, distinct keypoints.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.uv.len() != n {
            return Err(CoreError::Dimension(format!(
                "uv count {} != vertex count {}",
                self.uv.len(),
                n
            )));
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return Err(CoreError::Bounds(format!("face {i} references vertex >= {n}")));
            }
        }
        for (i, uv) in self.uv.iter().enumerate() {
            if !(0.0..=1.0).contains(&uv.x) || !(0.0..=1.0).contains(&uv.y) {
                return Err(CoreError::Bounds(format!("uv {i} outside [0,1]^2")));
            }
        }
        for (i, &k) in self.keypoint_ids.iter().enumerate() {
            if k >= n {
                return Err(CoreError::Bounds(format!("keypoint {i} references vertex >= {n}")));
            }
            if self.keypoint_ids[..i].contains(&k) {
                return Err(CoreError::Bounds(format!("keypoint vertex {k} repeated")));
            }
        }
        Ok(())
    }

    /// Axis-aligned bounds; `None` for an empty mesh.
    pub fn aabb(&self) -> Option<Aabb> {
        let first = *self.vertices.first()?;
        let mut min = first;
        let mut max = first;
        for v in &self.vertices[1..] {
            for c in 0..3 {
                min[c] = min[c].min(v[c]);
                max[c] = max[c].max(v[c]);
            }
        }
        Some(Aabb { min, max })
    }

    /// Mean of all vertex positions.
    pub fn centroid(&self) -> Point3<f64> {
        let mut acc = nalgebra::Vector3::zeros();
        for v in &self.vertices {
            acc += v.coords;
        }
        Point3::from(acc / self.vertices.len().max(1) as f64)
    }

    /// World positions of the designated keypoint vertices.
    pub fn keypoints(&self) -> Vec<Point3<f64>> {
        self.keypoint_ids.iter().map(|&i| self.vertices[i]).collect()
    }
}
