//! Pinhole camera with translation-only extrinsics.

use alloc::format;
use nalgebra::{Matrix2x3, Point2, Point3, Vector3};

use crate::error::{CoreError, Result};

/// Pinhole camera: fixed focal length and principal point, model placed in
/// the camera frame by a translation `t` (the only optimized extrinsic).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    /// Focal length in pixels.
    pub focal: f64,
    /// Principal point in pixels.
    pub principal_point: Point2<f64>,
    /// Model translation (x, y, z) in the camera frame, model units.
    pub translation: Vector3<f64>,
}

impl Camera {
    pub fn new(focal: f64, principal_point: Point2<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !(focal > 0.0) {
            return Err(CoreError::Config(format!("focal must be positive, got {focal}")));
        }
        if !(translation.z > 0.0) {
            return Err(CoreError::Config(format!(
                "translation z must be positive (model in front of camera), got {}",
                translation.z
            )));
        }
        Ok(Self { focal, principal_point, translation })
    }

    /// Camera-frame position of a model-space point.
    pub fn to_camera(&self, point: &Point3<f64>) -> Point3<f64> {
        point + self.translation
    }

    /// Project a model-space point to continuous pixel coordinates.
    pub fn project(&self, point: &Point3<f64>) -> Result<Point2<f64>> {
        let p = self.to_camera(point);
        if p.z <= 0.0 {
            return Err(CoreError::Projection(format!("point at depth {} is not in front of the camera", p.z)));
        }
        Ok(Point2::new(
            self.principal_point.x + self.focal * p.x / p.z,
            self.principal_point.y + self.focal * p.y / p.z,
        ))
    }

    /// Analytic Jacobian of the projected pixel w.r.t. the model-space point.
    ///
    /// Because the camera-frame placement is a pure translation this is also
    /// the Jacobian w.r.t. the translation parameters.
    pub fn projection_jacobian(&self, point: &Point3<f64>) -> Result<Matrix2x3<f64>> {
        let p = self.to_camera(point);
        if p.z <= 0.0 {
            return Err(CoreError::Projection(format!("point at depth {} is not in front of the camera", p.z)));
        }
        let iz = 1.0 / p.z;
        Ok(Matrix2x3::new(
            self.focal * iz,
            0.0,
            -self.focal * p.x * iz * iz,
            0.0,
            self.focal * iz,
            -self.focal * p.y * iz * iz,
        ))
    }
}
