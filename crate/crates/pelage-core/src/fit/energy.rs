//! Fit energy: residual vector and its Jacobian.
//!
//! Residual layout (scalar energy = squared norm):
//!
//! ```text
//! [ sqrt(w_kp)    * (proj(x_k) - u_k)   for each visible keypoint k ]  2 rows each
//! [ sqrt(w_sil)   * DT_obs(p)           for each boundary sample p  ]  optional
//! [ sqrt(w_pose)  * root_rotation, joint_angles                     ]  3J rows
//! [ sqrt(w_shape) * beta                                            ]  40 rows
//! ```

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Matrix3, Point3, Vector3};

use crate::error::{CoreError, Result};
use crate::geometry::{
    rodrigues_jacobian, Affine, Camera, Mesh, Model, Pose, ShapeCoeffs, SkinWeight,
};
use crate::render::{distance_transform, rasterize};

use super::observation::Observation;
use super::FitConfig;

/// Relative weights of the energy terms (applied as square roots to residuals).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWeights {
    pub keypoint: f64,
    pub silhouette: f64,
    pub pose: f64,
    pub shape: f64,
}

impl Default for EnergyWeights {
    fn default() -> Self {
        Self { keypoint: 1.0, silhouette: 0.05, pose: 0.01, shape: 0.01 }
    }
}

/// Packing of (pose, shape, camera translation) into one parameter vector:
/// `[root(3) | joint_angles(3(J-1)) | beta(40) | translation(3)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamLayout {
    joints: usize,
    modes: usize,
}

impl ParamLayout {
    pub fn new(joints: usize, modes: usize) -> Self {
        Self { joints, modes }
    }

    pub fn len(&self) -> usize {
        3 * self.joints + self.modes + 3
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pose_params(&self) -> usize {
        3 * self.joints
    }

    fn beta_offset(&self) -> usize {
        3 * self.joints
    }

    fn translation_offset(&self) -> usize {
        3 * self.joints + self.modes
    }

    pub fn translation_indices(&self) -> Vec<usize> {
        (self.translation_offset()..self.len()).collect()
    }

    pub fn translation_root_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..3).collect();
        v.extend(self.translation_indices());
        v
    }

    pub fn pack(&self, pose: &Pose, shape: &ShapeCoeffs, translation: &Vector3<f64>) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len());
        x.extend_from_slice(pose.root_rotation.as_slice());
        for a in &pose.joint_angles {
            x.extend_from_slice(a.as_slice());
        }
        x.extend_from_slice(&shape.beta);
        x.extend_from_slice(translation.as_slice());
        debug_assert_eq!(x.len(), self.len());
        x
    }

    pub fn unpack(&self, x: &[f64]) -> (Pose, ShapeCoeffs, Vector3<f64>) {
        let root = Vector3::new(x[0], x[1], x[2]);
        let mut joint_angles = Vec::with_capacity(self.joints - 1);
        for j in 1..self.joints {
            joint_angles.push(Vector3::new(x[3 * j], x[3 * j + 1], x[3 * j + 2]));
        }
        let beta = x[self.beta_offset()..self.beta_offset() + self.modes].to_vec();
        let t = self.translation_offset();
        (
            Pose { root_rotation: root, joint_angles },
            ShapeCoeffs { beta },
            Vector3::new(x[t], x[t + 1], x[t + 2]),
        )
    }
}

/// Derivative of an affine map: a 3x3 linear part and a translation part.
#[derive(Debug, Clone, Copy)]
struct DAffine {
    r: Matrix3<f64>,
    t: Vector3<f64>,
}

impl DAffine {
    fn zero() -> Self {
        Self { r: Matrix3::zeros(), t: Vector3::zeros() }
    }
}

/// The fit energy for one (model, observation) pair.
pub struct Energy<'a> {
    model: &'a Model,
    obs: &'a Observation,
    weights: EnergyWeights,
    layout: ParamLayout,
    focal: f64,
    principal: nalgebra::Point2<f64>,
    use_silhouette: bool,
    boundary_samples: usize,
    sil_fd_step: f64,
    /// Distance transform of the observed mask (present when the silhouette
    /// term is active).
    dt: Option<Vec<f64>>,
}

impl<'a> Energy<'a> {
    /// Energy with intrinsics at the observation's image center.
    pub fn new(model: &'a Model, obs: &'a Observation, config: &FitConfig) -> Result<Energy<'a>> {
        let principal = nalgebra::Point2::new(
            obs.image_size.0 as f64 / 2.0,
            obs.image_size.1 as f64 / 2.0,
        );
        Self::with_intrinsics(model, obs, config, config.focal, principal)
    }

    /// Energy with explicit camera intrinsics (focal, principal point).
    pub fn with_intrinsics(
        model: &'a Model,
        obs: &'a Observation,
        config: &FitConfig,
        focal: f64,
        principal: nalgebra::Point2<f64>,
    ) -> Result<Energy<'a>> {
        let use_silhouette = config.use_silhouette && obs.silhouette.is_some();
        let dt = if use_silhouette {
            let mask = obs.silhouette.as_ref().unwrap();
            Some(distance_transform(mask, obs.image_size.0, obs.image_size.1))
        } else {
            None
        };
        Ok(Energy {
            model,
            obs,
            weights: config.weights,
            layout: ParamLayout::new(model.joint_count(), model.basis.modes.len()),
            focal,
            principal,
            use_silhouette,
            boundary_samples: config.boundary_samples,
            sil_fd_step: config.silhouette_fd_step,
            dt,
        })
    }

    pub fn layout(&self) -> ParamLayout {
        self.layout
    }

    pub fn residual_len(&self) -> usize {
        2 * self.obs.visible_count()
            + if self.use_silhouette { self.boundary_samples } else { 0 }
            + self.layout.pose_params()
            + self.layout.modes
    }

    fn camera(&self, x: &[f64]) -> Result<Camera> {
        let t = self.layout.translation_offset();
        let translation = Vector3::new(x[t], x[t + 1], x[t + 2]);
        if translation.z <= 0.0 {
            return Err(CoreError::Projection("model behind camera".into()));
        }
        Ok(Camera { focal: self.focal, principal_point: self.principal, translation })
    }

    /// Full residual vector at `x`.
    pub fn residuals(&self, x: &[f64]) -> Result<DVector<f64>> {
        let (pose, shape, _) = self.layout.unpack(x);
        let camera = self.camera(x)?;
        let mut r = Vec::with_capacity(self.residual_len());

        let wk = self.weights.keypoint.sqrt();
        let kps = self.model.posed_keypoints(&pose, &shape)?;
        for (kp, obs_kp) in kps.iter().zip(self.obs.keypoints.iter()) {
            if !obs_kp.visible {
                continue;
            }
            let u = camera.project(kp)?;
            r.push(wk * (u.x - obs_kp.position.x));
            r.push(wk * (u.y - obs_kp.position.y));
        }

        if self.use_silhouette {
            let ws = self.weights.silhouette.sqrt();
            let posed = self.model.posed_mesh(&pose, &shape)?;
            let samples = self.boundary_distances(&posed, &camera)?;
            for d in samples {
                r.push(ws * d);
            }
        }

        let wp = self.weights.pose.sqrt();
        for i in 0..self.layout.pose_params() {
            r.push(wp * x[i]);
        }
        let wb = self.weights.shape.sqrt();
        for m in 0..self.layout.modes {
            r.push(wb * x[self.layout.beta_offset() + m]);
        }
        Ok(DVector::from_vec(r))
    }

    /// Observed-mask distance sampled at model silhouette boundary points.
    fn boundary_distances(&self, posed: &Mesh, camera: &Camera) -> Result<Vec<f64>> {
        let (w, h) = self.obs.image_size;
        let buf = rasterize(posed, camera, (w, h), None, None)?;
        let mut boundary = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if !buf.silhouette[y * w + x] {
                    continue;
                }
                let edge = x == 0
                    || y == 0
                    || x == w - 1
                    || y == h - 1
                    || !buf.silhouette[y * w + x - 1]
                    || !buf.silhouette[y * w + x + 1]
                    || !buf.silhouette[(y - 1) * w + x]
                    || !buf.silhouette[(y + 1) * w + x];
                if edge {
                    boundary.push(y * w + x);
                }
            }
        }
        if boundary.is_empty() {
            return Err(CoreError::Render("model silhouette is empty".into()));
        }
        let dt = self.dt.as_ref().expect("dt present when silhouette term active");
        let n = self.boundary_samples;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let idx = boundary[i * boundary.len() / n];
            let d = dt[idx];
            out.push(if d.is_finite() { d } else { (w + h) as f64 });
        }
        Ok(out)
    }

    /// Jacobian of the residual vector: analytic rows for keypoints and
    /// priors, central finite differences (restricted to `active` columns)
    /// for the silhouette block.
    pub fn jacobian(&self, x: &[f64], active: &[usize]) -> Result<DMatrix<f64>> {
        let (pose, shape, _) = self.layout.unpack(x);
        let camera = self.camera(x)?;
        let n_rows = self.residual_len();
        let mut jac = DMatrix::zeros(n_rows, self.layout.len());

        // Forward kinematics with derivatives of every joint world transform
        // w.r.t. every pose parameter.
        let (world, dworld) = self.fk_derivatives(&pose);
        let rest = self.model.skeleton.rest_world();
        let joints = self.layout.joints;
        let mut g = Vec::with_capacity(joints);
        let mut dg = vec![vec![DAffine::zero(); 3 * joints]; joints];
        for j in 0..joints {
            let ainv = rest[j].inverse();
            g.push(world[j].compose(&ainv));
            for q in 0..3 * joints {
                let dw = &dworld[j][q];
                dg[j][q] = DAffine { r: dw.r * ainv.r, t: dw.r * ainv.t + dw.t };
            }
        }

        let wk = self.weights.keypoint.sqrt();
        let shaped = self.model.shaped_keypoints(&shape);
        let mut row = 0usize;
        for (k, obs_kp) in self.obs.keypoints.iter().enumerate() {
            if !obs_kp.visible {
                continue;
            }
            let v_id = self.model.template.keypoint_ids[k];
            let ws: &[SkinWeight] = &self.model.skeleton.skin_weights[v_id];
            let x0 = shaped[k];
            // Blended transform and world position.
            let mut y = Vector3::zeros();
            let mut r_bar = Matrix3::zeros();
            for w in ws {
                y += (g[w.joint].r * x0.coords + g[w.joint].t) * w.weight;
                r_bar += g[w.joint].r * w.weight;
            }
            let jp = camera.projection_jacobian(&Point3::from(y))?;

            // Pose columns.
            for q in 0..3 * joints {
                let mut dy = Vector3::zeros();
                let mut nonzero = false;
                for w in ws {
                    let d = &dg[w.joint][q];
                    if d.r != Matrix3::zeros() || d.t != Vector3::zeros() {
                        nonzero = true;
                        dy += (d.r * x0.coords + d.t) * w.weight;
                    }
                }
                if nonzero {
                    let du = jp * dy;
                    jac[(row, q)] = wk * du.x;
                    jac[(row + 1, q)] = wk * du.y;
                }
            }
            // Shape columns.
            for m in 0..self.layout.modes {
                let mode = self.model.basis.modes[m][v_id];
                let du = jp * (r_bar * mode);
                jac[(row, self.layout.beta_offset() + m)] = wk * du.x;
                jac[(row + 1, self.layout.beta_offset() + m)] = wk * du.y;
            }
            // Translation columns.
            let t0 = self.layout.translation_offset();
            for c in 0..3 {
                jac[(row, t0 + c)] = wk * jp[(0, c)];
                jac[(row + 1, t0 + c)] = wk * jp[(1, c)];
            }
            row += 2;
        }

        if self.use_silhouette {
            // Central differences on the silhouette block only.
            let h = self.sil_fd_step;
            let base_rows = row;
            for &q in active {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[q] += h;
                xm[q] -= h;
                let sp = self.silhouette_block(&xp)?;
                let sm = self.silhouette_block(&xm)?;
                for (i, (p, m)) in sp.iter().zip(sm.iter()).enumerate() {
                    jac[(base_rows + i, q)] = (p - m) / (2.0 * h);
                }
            }
            row += self.boundary_samples;
        }

        let wp = self.weights.pose.sqrt();
        for i in 0..self.layout.pose_params() {
            jac[(row + i, i)] = wp;
        }
        row += self.layout.pose_params();
        let wb = self.weights.shape.sqrt();
        for m in 0..self.layout.modes {
            jac[(row + m, self.layout.beta_offset() + m)] = wb;
        }
        Ok(jac)
    }

    /// Weighted silhouette residual block at `x` (used for finite differences).
    fn silhouette_block(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (pose, shape, _) = self.layout.unpack(x);
        let camera = self.camera(x)?;
        let posed = self.model.posed_mesh(&pose, &shape)?;
        let ws = self.weights.silhouette.sqrt();
        Ok(self.boundary_distances(&posed, &camera)?.into_iter().map(|d| ws * d).collect())
    }

    /// World transform of every joint and its derivative w.r.t. each of the
    /// `3J` pose parameters (root first, then non-root joints in order).
    fn fk_derivatives(&self, pose: &Pose) -> (Vec<Affine>, Vec<Vec<DAffine>>) {
        let joints = &self.model.skeleton.joints;
        let n = joints.len();
        let mut world: Vec<Affine> = Vec::with_capacity(n);
        let mut dworld: Vec<Vec<DAffine>> = Vec::with_capacity(n);
        let mut non_root = 0usize;
        for joint in joints.iter() {
            let (angles, param_base) = match joint.parent {
                Some(_) => {
                    let a = pose.joint_angles[non_root];
                    non_root += 1;
                    (a, 3 * non_root) // parameters 3..3J for non-root joints
                }
                None => (pose.root_rotation, 0),
            };
            let r = crate::geometry::rodrigues(&angles);
            let dr = rodrigues_jacobian(&angles);
            let local = Affine { r, t: joint.rest_offset };
            let (w, mut dw) = match joint.parent {
                Some(p) => {
                    let pw = world[p];
                    let w = pw.compose(&local);
                    // Chain: derivative through the parent for every parameter.
                    let mut dw: Vec<DAffine> = dworld[p]
                        .iter()
                        .map(|dpw| DAffine { r: dpw.r * local.r, t: dpw.r * local.t + dpw.t })
                        .collect();
                    for i in 0..3 {
                        // This joint's own parameters: W_parent ∘ T(offset) ∘ dR.
                        dw[param_base + i] = DAffine { r: pw.r * dr[i], t: Vector3::zeros() };
                    }
                    (w, dw)
                }
                None => {
                    let mut dw = vec![DAffine::zero(); 3 * n];
                    for i in 0..3 {
                        dw[i] = DAffine { r: dr[i], t: Vector3::zeros() };
                    }
                    (local, dw)
                }
            };
            // Parameters of joints that are not ancestors stay zero.
            debug_assert_eq!(dw.len(), 3 * n);
            world.push(w);
            dworld.push(core::mem::take(&mut dw));
        }
        (world, dworld)
    }
}
