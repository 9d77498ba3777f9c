//! Linear shape deformation basis.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::Vector3;

use crate::error::{CoreError, Result};

use super::mesh::Mesh;

/// Number of shape modes carried by every template.
pub const SHAPE_MODES: usize = 40;

/// Per-vertex displacement fields; vertex deformation is their weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeBasis {
    /// `modes[m][v]` is the displacement of vertex `v` under mode `m`.
    pub modes: Vec<Vec<Vector3<f64>>>,
}

impl ShapeBasis {
    pub fn validate(&self, vertex_count: usize) -> Result<()> {
        if self.modes.len() != SHAPE_MODES {
            return Err(CoreError::Dimension(format!(
                "shape basis has {} modes, expected {SHAPE_MODES}",
                self.modes.len()
            )));
        }
        for (m, field) in self.modes.iter().enumerate() {
            if field.len() != vertex_count {
                return Err(CoreError::Dimension(format!(
                    "mode {m} has {} displacements, mesh has {vertex_count} vertices",
                    field.len()
                )));
            }
        }
        Ok(())
    }
}

/// Unitless coefficients over the 40 shape modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCoeffs {
    pub beta: Vec<f64>,
}

impl ShapeCoeffs {
    pub fn zeros() -> Self {
        Self { beta: alloc::vec![0.0; SHAPE_MODES] }
    }

    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.len() != SHAPE_MODES {
            return Err(CoreError::Dimension(format!(
                "shape coefficients must have length {SHAPE_MODES}, got {}",
                beta.len()
            )));
        }
        if !beta.iter().all(|b| b.is_finite()) {
            return Err(CoreError::Input("shape coefficients must be finite".into()));
        }
        Ok(Self { beta })
    }
}

/// Displace the mesh vertices: `v' = v + Σ_m β_m · mode_m[v]`.
///
/// Faces, uv and keypoints are unchanged.
pub fn apply_shape(mesh: &Mesh, basis: &ShapeBasis, coeffs: &ShapeCoeffs) -> Result<Mesh> {
    basis.validate(mesh.vertices.len())?;
    if coeffs.beta.len() != basis.modes.len() {
        return Err(CoreError::Dimension(format!(
            "{} coefficients for {} modes",
            coeffs.beta.len(),
            basis.modes.len()
        )));
    }
    let mut out = mesh.clone();
    for (m, field) in basis.modes.iter().enumerate() {
        let b = coeffs.beta[m];
        if b == 0.0 {
            continue;
        }
        for (v, d) in out.vertices.iter_mut().zip(field.iter()) {
            v.coords += d * b;
        }
    }
    Ok(out)
}
