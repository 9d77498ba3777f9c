//! Skeleton, forward kinematics and linear blend skinning.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::{CoreError, Result};

use super::mesh::Mesh;
use super::rotation::rodrigues;

/// Rigid transform `x -> R x + t` stored as a rotation and a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub r: Matrix3<f64>,
    pub t: Vector3<f64>,
}

impl Affine {
    pub fn identity() -> Self {
        Self { r: Matrix3::identity(), t: Vector3::zeros() }
    }

    pub fn translation(t: Vector3<f64>) -> Self {
        Self { r: Matrix3::identity(), t }
    }

    pub fn rotation(r: Matrix3<f64>) -> Self {
        Self { r, t: Vector3::zeros() }
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Affine) -> Affine {
        Affine { r: self.r * other.r, t: self.r * other.t + self.t }
    }

    /// Inverse of a rigid transform.
    pub fn inverse(&self) -> Affine {
        let rt = self.r.transpose();
        Affine { r: rt, t: -(rt * self.t) }
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.r * p.coords + self.t)
    }
}

/// One joint of the skeleton: a name, an optional parent and the offset of
/// the joint from its parent in the rest configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub rest_offset: Vector3<f64>,
}

/// Sparse per-vertex skinning weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinWeight {
    pub joint: usize,
    pub weight: f64,
}

/// Topologically sorted joint hierarchy plus per-vertex skinning weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub joints: Vec<Joint>,
    /// One weight list per mesh vertex; weights are non-negative and sum to 1.
    pub skin_weights: Vec<Vec<SkinWeight>>,
}

impl Skeleton {
    /// Build a skeleton, checking the structural invariants.
    pub fn new(joints: Vec<Joint>, skin_weights: Vec<Vec<SkinWeight>>) -> Result<Self> {
        let roots = joints.iter().filter(|j| j.parent.is_none()).count();
        if roots != 1 {
            return Err(CoreError::Config(format!("expected exactly one root joint, found {roots}")));
        }
        for (i, j) in joints.iter().enumerate() {
            if let Some(p) = j.parent {
                if p >= i {
                    return Err(CoreError::Config(format!(
                        "joint {i} has parent {p}; joints must be topologically sorted"
                    )));
                }
            }
        }
        for (v, ws) in skin_weights.iter().enumerate() {
            let mut sum = 0.0;
            for w in ws {
                if w.joint >= joints.len() {
                    return Err(CoreError::Bounds(format!("vertex {v} weights joint {}", w.joint)));
                }
                if w.weight < 0.0 {
                    return Err(CoreError::Config(format!("vertex {v} has negative skin weight")));
                }
                sum += w.weight;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(CoreError::Config(format!("vertex {v} weights sum to {sum}, expected 1")));
            }
        }
        Ok(Self { joints, skin_weights })
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    /// World transform of every joint in the rest configuration.
    pub fn rest_world(&self) -> Vec<Affine> {
        let mut out = Vec::with_capacity(self.joints.len());
        for j in &self.joints {
            let local = Affine::translation(j.rest_offset);
            let world = match j.parent {
                Some(p) => {
                    let pw: &Affine = &out[p];
                    pw.compose(&local)
                }
                None => local,
            };
            out.push(world);
        }
        out
    }

    /// World transform of every joint under `pose`.
    ///
    /// Joint `j`'s world transform is
    /// `parent ∘ translate(rest_offset_j) ∘ rotate(angles_j)`;
    /// the root uses `pose.root_rotation`.
    pub fn posed_world(&self, pose: &Pose) -> Result<Vec<Affine>> {
        if pose.joint_angles.len() != self.joints.len().saturating_sub(1) {
            return Err(CoreError::Dimension(format!(
                "pose has {} joint angles, skeleton expects {}",
                pose.joint_angles.len(),
                self.joints.len() - 1
            )));
        }
        let mut out: Vec<Affine> = Vec::with_capacity(self.joints.len());
        let mut non_root = 0usize;
        for j in &self.joints {
            let angles = match j.parent {
                Some(_) => {
                    let a = pose.joint_angles[non_root];
                    non_root += 1;
                    a
                }
                None => pose.root_rotation,
            };
            let local = Affine::translation(j.rest_offset).compose(&Affine::rotation(rodrigues(&angles)));
            let world = match j.parent {
                Some(p) => out[p].compose(&local),
                None => local,
            };
            out.push(world);
        }
        Ok(out)
    }
}

/// Pose parameters: root orientation plus per-non-root-joint relative angles,
/// all as axis-angle vectors in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub root_rotation: Vector3<f64>,
    pub joint_angles: Vec<Vector3<f64>>,
}

impl Pose {
    /// Rest pose for a skeleton with `joint_count` joints.
    pub fn rest(joint_count: usize) -> Self {
        Self {
            root_rotation: Vector3::zeros(),
            joint_angles: alloc::vec![Vector3::zeros(); joint_count.saturating_sub(1)],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.root_rotation.iter().all(|v| v.is_finite())
            && self.joint_angles.iter().all(|a| a.iter().all(|v| v.is_finite()))
    }

    /// Wrap every axis-angle vector into the canonical range (magnitude <= pi).
    pub fn canonicalized(&self) -> Pose {
        fn wrap(w: Vector3<f64>) -> Vector3<f64> {
            let theta = w.norm();
            if theta <= core::f64::consts::PI || theta == 0.0 {
                return w;
            }
            let turns = libm::floor((theta + core::f64::consts::PI) / core::f64::consts::TAU);
            w * ((theta - turns * core::f64::consts::TAU) / theta)
        }
        Pose {
            root_rotation: wrap(self.root_rotation),
            joint_angles: self.joint_angles.iter().map(|&a| wrap(a)).collect(),
        }
    }
}

/// Per-joint rigid transforms relative to the rest pose, ready for skinning.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTransforms {
    pub rest_relative: Vec<Affine>,
}

/// Forward kinematics: rest-relative transform `G_j = W_j(pose) * A_j^{-1}`
/// per joint, where `A_j` is the joint's rest world transform.
pub fn pose_skeleton(skeleton: &Skeleton, pose: &Pose) -> Result<JointTransforms> {
    let posed = skeleton.posed_world(pose)?;
    let rest = skeleton.rest_world();
    let rest_relative = posed
        .iter()
        .zip(rest.iter())
        .map(|(w, a)| w.compose(&a.inverse()))
        .collect();
    Ok(JointTransforms { rest_relative })
}

/// Linear blend skinning of an entire mesh: `v' = Σ_j w_vj G_j(v)`.
pub fn skin(mesh: &Mesh, skeleton: &Skeleton, transforms: &JointTransforms) -> Result<Mesh> {
    if skeleton.skin_weights.len() != mesh.vertices.len() {
        return Err(CoreError::Dimension(format!(
            "skin weights for {} vertices, mesh has {}",
            skeleton.skin_weights.len(),
            mesh.vertices.len()
        )));
    }
    let mut out = mesh.clone();
    for (v, ws) in out.vertices.iter_mut().zip(skeleton.skin_weights.iter()) {
        *v = blend(v, ws, &transforms.rest_relative);
    }
    Ok(out)
}

/// Skin a subset of vertices (used by the fit energy, which only needs the
/// keypoint vertices).
pub fn skin_points(
    points: &[Point3<f64>],
    weights: &[&[SkinWeight]],
    transforms: &JointTransforms,
) -> Vec<Point3<f64>> {
    points
        .iter()
        .zip(weights.iter())
        .map(|(p, ws)| blend(p, ws, &transforms.rest_relative))
        .collect()
}

fn blend(p: &Point3<f64>, ws: &[SkinWeight], g: &[Affine]) -> Point3<f64> {
    let mut acc = Vector3::zeros();
    for w in ws {
        acc += (g[w.joint].r * p.coords + g[w.joint].t) * w.weight;
    }
    Point3::from(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use approx::assert_relative_eq;
    use nalgebra::Point2;

    fn two_joint_chain() -> Skeleton {
        Skeleton::new(
            vec![
                Joint { name: "root".to_string(), parent: None, rest_offset: Vector3::zeros() },
                Joint {
                    name: "child".to_string(),
                    parent: Some(0),
                    rest_offset: Vector3::new(1.0, 0.0, 0.0),
                },
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn zero_pose_gives_identity_transforms() {
        let sk = two_joint_chain();
        let t = pose_skeleton(&sk, &Pose::rest(2)).unwrap();
        for g in &t.rest_relative {
            assert_relative_eq!(g.r, Matrix3::identity(), epsilon = 1e-15);
            assert_relative_eq!(g.t, Vector3::zeros(), epsilon = 1e-15);
        }
    }

    #[test]
    fn parent_quarter_turn_moves_child() {
        // Parent rotated 90 deg about z, child rest offset (1,0,0): the child
        // lands at (0,1,0) relative to the parent.
        let sk = two_joint_chain();
        let pose = Pose {
            root_rotation: Vector3::new(0.0, 0.0, core::f64::consts::FRAC_PI_2),
            joint_angles: vec![Vector3::zeros()],
        };
        let world = sk.posed_world(&pose).unwrap();
        let child_pos = world[1].t;
        let parent_pos = world[0].t;
        assert_relative_eq!(child_pos - parent_pos, Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn pure_root_rotation_rotates_all_joints_about_root() {
        let sk = Skeleton::new(
            vec![
                Joint { name: "root".to_string(), parent: None, rest_offset: Vector3::new(0.5, -0.25, 0.0) },
                Joint { name: "a".to_string(), parent: Some(0), rest_offset: Vector3::new(1.0, 0.0, 0.0) },
                Joint { name: "b".to_string(), parent: Some(1), rest_offset: Vector3::new(0.0, 2.0, 0.5) },
            ],
            vec![],
        )
        .unwrap();
        let w = Vector3::new(0.4, -0.8, 0.3);
        let r = rodrigues(&w);
        let pose = Pose { root_rotation: w, joint_angles: vec![Vector3::zeros(); 2] };
        let posed = sk.posed_world(&pose).unwrap();
        let rest = sk.rest_world();
        let root = rest[0].t;
        for (p, a) in posed.iter().zip(rest.iter()) {
            let expect = r * (a.t - root) + root;
            assert_relative_eq!(p.t, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_hot_weight_applies_joint_transform_rigidly() {
        let sk = Skeleton::new(
            vec![
                Joint { name: "root".to_string(), parent: None, rest_offset: Vector3::zeros() },
                Joint { name: "child".to_string(), parent: Some(0), rest_offset: Vector3::new(1.0, 0.0, 0.0) },
            ],
            vec![
                vec![SkinWeight { joint: 1, weight: 1.0 }],
            ],
        )
        .unwrap();
        let mesh = Mesh {
            vertices: vec![Point3::new(1.5, 0.2, -0.1)],
            faces: vec![],
            uv: vec![Point2::new(0.0, 0.0)],
            keypoint_ids: vec![],
        };
        let pose = Pose {
            root_rotation: Vector3::zeros(),
            joint_angles: vec![Vector3::new(0.0, 0.0, core::f64::consts::FRAC_PI_2)],
        };
        let t = pose_skeleton(&sk, &pose).unwrap();
        let skinned = skin(&mesh, &sk, &t).unwrap();
        let g = &t.rest_relative[1];
        let expect = g.apply(&mesh.vertices[0]);
        assert_relative_eq!(skinned.vertices[0], expect, epsilon = 1e-15);
        // The joint rotates about its own rest position (1,0,0).
        let rel = mesh.vertices[0] - Vector3::new(1.0, 0.0, 0.0);
        let rot = rodrigues(&Vector3::new(0.0, 0.0, core::f64::consts::FRAC_PI_2)) * rel.coords;
        assert_relative_eq!(
            skinned.vertices[0].coords,
            rot + Vector3::new(1.0, 0.0, 0.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn half_weights_on_two_translations_average_displacement() {
        // Hand LBS arithmetic: 0.5/0.5 on pure translations (2,0,0) and (0,2,0)
        // displace the vertex by (1,1,0).
        let g = vec![Affine::translation(Vector3::new(2.0, 0.0, 0.0)), Affine::translation(Vector3::new(0.0, 2.0, 0.0))];
        let p = Point3::new(0.3, 0.4, 0.5);
        let out = blend(
            &p,
            &[SkinWeight { joint: 0, weight: 0.5 }, SkinWeight { joint: 1, weight: 0.5 }],
            &g,
        );
        assert_relative_eq!(out - p, Vector3::new(1.0, 1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn weight_sum_must_be_one() {
        let joints = vec![Joint { name: "root".to_string(), parent: None, rest_offset: Vector3::zeros() }];
        let err = Skeleton::new(joints, vec![vec![SkinWeight { joint: 0, weight: 0.5 }]]);
        assert!(err.is_err());
    }

    #[test]
    fn canonicalization_preserves_rotation() {
        let w = Vector3::new(2.5, 2.5, 1.0); // magnitude > pi
        let pose = Pose { root_rotation: w, joint_angles: vec![] };
        let canon = pose.canonicalized();
        assert!(canon.root_rotation.norm() <= core::f64::consts::PI + 1e-12);
        assert_relative_eq!(rodrigues(&canon.root_rotation), rodrigues(&w), epsilon = 1e-9);
    }
}
