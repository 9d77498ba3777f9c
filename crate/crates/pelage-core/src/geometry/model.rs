//! Bundled template: mesh + skeleton + shape basis.

use alloc::vec::Vec;
use nalgebra::Point3;

use crate::error::Result;

use super::mesh::Mesh;
use super::shape::{apply_shape, ShapeBasis, ShapeCoeffs};
use super::skeleton::{pose_skeleton, skin, skin_points, Pose, Skeleton, SkinWeight};
use super::template::{make_template, TemplateConfig};

/// The articulated template as one deformable unit.
#[derive(Debug, Clone)]
pub struct Model {
    pub template: Mesh,
    pub skeleton: Skeleton,
    pub basis: ShapeBasis,
}

impl Model {
    pub fn new(template: Mesh, skeleton: Skeleton, basis: ShapeBasis) -> Result<Self> {
        template.validate()?;
        basis.validate(template.vertices.len())?;
        Ok(Self { template, skeleton, basis })
    }

    pub fn from_config(config: &TemplateConfig) -> Result<Self> {
        let (template, skeleton, basis) = make_template(config)?;
        Ok(Self { template, skeleton, basis })
    }

    pub fn joint_count(&self) -> usize {
        self.skeleton.joint_count()
    }

    pub fn keypoint_count(&self) -> usize {
        self.template.keypoint_ids.len()
    }

    /// Height (y extent) of the rest template, used for depth initialization.
    pub fn height(&self) -> f64 {
        self.template.aabb().map(|b| b.extent().y).unwrap_or(0.0)
    }

    /// Full deformed mesh: shape displacement, then skinning under `pose`.
    pub fn posed_mesh(&self, pose: &Pose, beta: &ShapeCoeffs) -> Result<Mesh> {
        let shaped = apply_shape(&self.template, &self.basis, beta)?;
        let transforms = pose_skeleton(&self.skeleton, pose)?;
        skin(&shaped, &self.skeleton, &transforms)
    }

    /// Model-space positions of only the keypoint vertices under
    /// (`pose`, `beta`); much cheaper than deforming the whole mesh.
    pub fn posed_keypoints(&self, pose: &Pose, beta: &ShapeCoeffs) -> Result<Vec<Point3<f64>>> {
        let transforms = pose_skeleton(&self.skeleton, pose)?;
        let pts = self.shaped_keypoints(beta);
        let weights: Vec<&[SkinWeight]> = self
            .template
            .keypoint_ids
            .iter()
            .map(|&v| self.skeleton.skin_weights[v].as_slice())
            .collect();
        Ok(skin_points(&pts, &weights, &transforms))
    }

    /// Shape-displaced (unposed) keypoint vertex positions.
    pub fn shaped_keypoints(&self, beta: &ShapeCoeffs) -> Vec<Point3<f64>> {
        self.template
            .keypoint_ids
            .iter()
            .map(|&v| {
                let mut p = self.template.vertices[v];
                for (m, field) in self.basis.modes.iter().enumerate() {
                    p.coords += field[v] * beta.beta[m];
                }
                p
            })
            .collect()
    }
}
