//! Procedural mannequin quadruped: mesh, UV atlas, skeleton, shape basis.
//!
//! The template is assembled from closed primitive parts (ellipsoid torso and
//! head, cylinder legs/neck/tail). The UV atlas reserves the band
//! `v in [0.25, 0.75]` for the torso with the rear half of the body mapped to
//! `u in [0.55, 0.95]`, so the hindquarter+back crop rectangle used downstream
//! is correct by construction. All other parts map outside that band.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use nalgebra::{Point2, Point3, Vector3};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::rng;

use super::mesh::Mesh;
use super::shape::{ShapeBasis, SHAPE_MODES};
use super::skeleton::{Joint, Skeleton, SkinWeight};

/// Fixed seed for the low-frequency padding modes of the shape basis.
const PAD_MODE_SEED: u64 = 0x70_61_64_5f_6d_6f_64;

/// Canonical keypoint names, in the order they appear in `Mesh::keypoint_ids`.
pub const KEYPOINT_NAMES: [&str; 16] = [
    "nose",
    "withers",
    "hip_top",
    "tail_base",
    "shoulder_l",
    "shoulder_r",
    "hip_l",
    "hip_r",
    "knee_fl",
    "knee_fr",
    "knee_hl",
    "knee_hr",
    "hoof_fl",
    "hoof_fr",
    "hoof_hl",
    "hoof_hr",
];

/// Proportions and resolution of the procedural template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TemplateConfig {
    /// Torso length along the body axis, model units.
    pub body_length: f64,
    /// Torso vertical semi-axis (girth).
    pub girth: f64,
    pub leg_length: f64,
    pub leg_radius: f64,
    pub neck_length: f64,
    pub neck_radius: f64,
    pub head_size: f64,
    pub tail_length: f64,
    pub tail_radius: f64,
    pub torso_stacks: usize,
    pub torso_segments: usize,
    pub leg_rings: usize,
    pub leg_segments: usize,
    pub head_stacks: usize,
    pub head_segments: usize,
    pub neck_rings: usize,
    pub neck_segments: usize,
    pub tail_rings: usize,
    pub tail_segments: usize,
    /// Two-segment legs articulate at the knee (J = 11); single-segment legs
    /// pivot only at the shoulder/hip (J = 7).
    pub two_segment_legs: bool,
    /// Number of keypoints, a prefix of [`KEYPOINT_NAMES`]; 8..=16.
    pub keypoint_count: usize,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        Self {
            body_length: 2.0,
            girth: 0.5,
            leg_length: 1.1,
            leg_radius: 0.11,
            neck_length: 0.7,
            neck_radius: 0.16,
            head_size: 0.22,
            tail_length: 0.6,
            tail_radius: 0.045,
            torso_stacks: 12,
            torso_segments: 16,
            leg_rings: 6,
            leg_segments: 8,
            head_stacks: 6,
            head_segments: 8,
            neck_rings: 4,
            neck_segments: 8,
            tail_rings: 4,
            tail_segments: 6,
            two_segment_legs: true,
            keypoint_count: 16,
        }
    }
}

impl TemplateConfig {
    fn validate(&self) -> Result<()> {
        let proportions = [
            ("body_length", self.body_length),
            ("girth", self.girth),
            ("leg_length", self.leg_length),
            ("leg_radius", self.leg_radius),
            ("neck_length", self.neck_length),
            ("neck_radius", self.neck_radius),
            ("head_size", self.head_size),
            ("tail_length", self.tail_length),
            ("tail_radius", self.tail_radius),
        ];
        for (name, v) in proportions {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let resolutions = [
            ("torso_stacks", self.torso_stacks, 4),
            ("torso_segments", self.torso_segments, 6),
            ("leg_rings", self.leg_rings, 2),
            ("leg_segments", self.leg_segments, 4),
            ("head_stacks", self.head_stacks, 3),
            ("head_segments", self.head_segments, 4),
            ("neck_rings", self.neck_rings, 2),
            ("neck_segments", self.neck_segments, 4),
            ("tail_rings", self.tail_rings, 2),
            ("tail_segments", self.tail_segments, 4),
        ];
        for (name, v, min) in resolutions {
            if v < min {
                return Err(CoreError::Config(format!("{name} must be >= {min}, got {v}")));
            }
        }
        if !(8..=16).contains(&self.keypoint_count) {
            return Err(CoreError::Config(format!(
                "keypoint_count must be in 8..=16, got {}",
                self.keypoint_count
            )));
        }
        Ok(())
    }

    /// Joint count implied by the leg articulation flag.
    pub fn joint_count(&self) -> usize {
        if self.two_segment_legs {
            11
        } else {
            7
        }
    }
}

/// UV rectangle a part maps into.
#[derive(Clone, Copy)]
struct UvRect {
    u0: f64,
    u1: f64,
    v0: f64,
    v1: f64,
}

impl UvRect {
    fn at(&self, s: f64, t: f64) -> Point2<f64> {
        Point2::new(self.u0 + (self.u1 - self.u0) * s, self.v0 + (self.v1 - self.v0) * t)
    }
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Point3<f64>>,
    uv: Vec<Point2<f64>>,
    faces: Vec<[usize; 3]>,
    /// Per-vertex raw skin weights, normalized at the end.
    weights: Vec<Vec<SkinWeight>>,
}

impl Builder {
    fn push_vertex(&mut self, p: Point3<f64>, uv: Point2<f64>, weights: Vec<SkinWeight>) -> usize {
        self.vertices.push(p);
        self.uv.push(uv);
        self.weights.push(weights);
        self.vertices.len() - 1
    }

    /// Flip faces added since `face_start` so their normals point away from
    /// `center` (closed convex-ish parts only).
    fn orient_outward(&mut self, face_start: usize, center: &Point3<f64>) {
        for f in &mut self.faces[face_start..] {
            let a = self.vertices[f[0]];
            let b = self.vertices[f[1]];
            let c = self.vertices[f[2]];
            let n = (b - a).cross(&(c - a));
            let to_face = (a.coords + b.coords + c.coords) / 3.0 - center.coords;
            if n.dot(&to_face) < 0.0 {
                f.swap(1, 2);
            }
        }
    }

    /// Axis-aligned ellipsoid along x; poles at x = center.x ± semi.x.
    /// Longitude seam sits at phi = 0 (the belly, +y).
    #[allow(clippy::too_many_arguments)]
    fn ellipsoid(
        &mut self,
        center: Point3<f64>,
        semi: Vector3<f64>,
        stacks: usize,
        segments: usize,
        rect: UvRect,
        weights: impl Fn(&Point3<f64>) -> Vec<SkinWeight>,
    ) {
        let face_start = self.faces.len();
        let front = center + Vector3::new(semi.x, 0.0, 0.0);
        let back = center - Vector3::new(semi.x, 0.0, 0.0);
        let front_id = self.push_vertex(front, rect.at(0.0, 0.5), weights(&front));
        let mut rings: Vec<Vec<usize>> = Vec::new();
        for i in 1..stacks {
            let psi = core::f64::consts::PI * i as f64 / stacks as f64;
            let (sp, cp) = (libm::sin(psi), libm::cos(psi));
            let mut ring = Vec::with_capacity(segments + 1);
            for j in 0..=segments {
                let phi = core::f64::consts::TAU * j as f64 / segments as f64;
                let p = center
                    + Vector3::new(
                        semi.x * cp,
                        semi.y * sp * libm::cos(phi),
                        semi.z * sp * libm::sin(phi),
                    );
                let uv = rect.at(i as f64 / stacks as f64, j as f64 / segments as f64);
                ring.push(self.push_vertex(p, uv, weights(&p)));
            }
            rings.push(ring);
        }
        let back_id = self.push_vertex(back, rect.at(1.0, 0.5), weights(&back));
        for j in 0..segments {
            self.faces.push([front_id, rings[0][j], rings[0][j + 1]]);
        }
        for w in rings.windows(2) {
            for j in 0..segments {
                let (a, b) = (w[0][j], w[0][j + 1]);
                let (c, d) = (w[1][j], w[1][j + 1]);
                self.faces.push([a, b, c]);
                self.faces.push([b, d, c]);
            }
        }
        let last = rings.last().unwrap();
        for j in 0..segments {
            self.faces.push([back_id, last[j + 1], last[j]]);
        }
        self.orient_outward(face_start, &center);
    }

    /// Closed cylinder from `start` along `dir` (unit), capped at both ends.
    /// `t` runs 0 at `start` to 1 at the far cap.
    #[allow(clippy::too_many_arguments)]
    fn cylinder(
        &mut self,
        start: Point3<f64>,
        dir: Vector3<f64>,
        length: f64,
        radius: f64,
        rings: usize,
        segments: usize,
        rect: UvRect,
        weights: impl Fn(f64) -> Vec<SkinWeight>,
    ) {
        let face_start = self.faces.len();
        // Orthonormal frame around the axis.
        let helper = if dir.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let e1 = dir.cross(&helper).normalize();
        let e2 = dir.cross(&e1);
        let start_cap = self.push_vertex(start, rect.at(0.5, 0.0), weights(0.0));
        let mut ring_ids: Vec<Vec<usize>> = Vec::new();
        for k in 0..=rings {
            let t = k as f64 / rings as f64;
            let c = start + dir * (length * t);
            let mut ring = Vec::with_capacity(segments + 1);
            for j in 0..=segments {
                let a = core::f64::consts::TAU * j as f64 / segments as f64;
                let p = c + (e1 * libm::cos(a) + e2 * libm::sin(a)) * radius;
                let uv = rect.at(j as f64 / segments as f64, t);
                ring.push(self.push_vertex(p, uv, weights(t)));
            }
            ring_ids.push(ring);
        }
        let end = start + dir * length;
        let end_cap = self.push_vertex(end, rect.at(0.5, 1.0), weights(1.0));
        for j in 0..segments {
            self.faces.push([start_cap, ring_ids[0][j], ring_ids[0][j + 1]]);
        }
        for w in ring_ids.windows(2) {
            for j in 0..segments {
                let (a, b) = (w[0][j], w[0][j + 1]);
                let (c, d) = (w[1][j], w[1][j + 1]);
                self.faces.push([a, b, c]);
                self.faces.push([b, d, c]);
            }
        }
        let last = ring_ids.last().unwrap();
        for j in 0..segments {
            self.faces.push([end_cap, last[j + 1], last[j]]);
        }
        self.orient_outward(face_start, &(start + dir * (length * 0.5)));
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

// Joint indices in the canonical skeleton layout.
const J_ROOT: usize = 0;
const J_NECK: usize = 1;
const J_HEAD: usize = 2;

/// Index of a leg's upper joint; `leg` is 0..4 in order fl, fr, hl, hr.
fn leg_upper(leg: usize, two_segment: bool) -> usize {
    if two_segment {
        3 + 2 * leg
    } else {
        3 + leg
    }
}

/// Build the template mesh, skeleton and shape basis for a config.
///
/// Deterministic: the same config always yields bit-identical output. The
/// returned mesh has its vertex centroid at the origin.
pub fn make_template(config: &TemplateConfig) -> Result<(Mesh, Skeleton, ShapeBasis)> {
    config.validate()?;
    let a = config.body_length / 2.0;
    let b = config.girth;
    let c = config.girth * 0.8;
    let two = config.two_segment_legs;

    // Anatomy anchors, in pre-centering coordinates (torso center at origin).
    let y_attach = b * 0.35;
    let leg_attach = [
        Point3::new(a * 0.55, y_attach, c * 0.5),   // fl (left = +z)
        Point3::new(a * 0.55, y_attach, -c * 0.5),  // fr
        Point3::new(-a * 0.55, y_attach, c * 0.5),  // hl
        Point3::new(-a * 0.55, y_attach, -c * 0.5), // hr
    ];
    let neck_base = Point3::new(a * 0.8, -b * 0.3, 0.0);
    let neck_dir = Vector3::new(0.75, -0.66, 0.0).normalize();
    let neck_end = neck_base + neck_dir * config.neck_length;
    let head_center = neck_end + neck_dir * (config.head_size * 0.5);
    let head_semi = Vector3::new(config.head_size * 1.3, config.head_size * 0.8, config.head_size * 0.7);
    let tail_start = Point3::new(-a * 0.95, -b * 0.1, 0.0);
    let tail_dir = Vector3::new(-0.45, 0.89, 0.0).normalize();

    let mut bld = Builder::default();

    // Torso: the UV band v in [0.25, 0.75]; rear (hindquarter) at high u.
    bld.ellipsoid(
        Point3::origin(),
        Vector3::new(a, b, c),
        config.torso_stacks,
        config.torso_segments,
        UvRect { u0: 0.05, u1: 0.95, v0: 0.25, v1: 0.75 },
        |_| alloc::vec![SkinWeight { joint: J_ROOT, weight: 1.0 }],
    );

    // Legs: bottom UV strip.
    for (leg, attach) in leg_attach.iter().enumerate() {
        let u0 = 0.03 + 0.24 * leg as f64;
        let upper = leg_upper(leg, two);
        bld.cylinder(
            *attach,
            Vector3::y(),
            config.leg_length,
            config.leg_radius,
            config.leg_rings,
            config.leg_segments,
            UvRect { u0, u1: u0 + 0.20, v0: 0.02, v1: 0.20 },
            |t| {
                let body = smoothstep(t / 0.25);
                let mut w = alloc::vec![SkinWeight { joint: J_ROOT, weight: 1.0 - body }];
                if two {
                    let lower = smoothstep((t - 0.45) / 0.3);
                    w.push(SkinWeight { joint: upper, weight: body * (1.0 - lower) });
                    w.push(SkinWeight { joint: upper + 1, weight: body * lower });
                } else {
                    w.push(SkinWeight { joint: upper, weight: body });
                }
                w
            },
        );
    }

    // Neck, head, tail: top UV strip.
    bld.cylinder(
        neck_base,
        neck_dir,
        config.neck_length,
        config.neck_radius,
        config.neck_rings,
        config.neck_segments,
        UvRect { u0: 0.03, u1: 0.27, v0: 0.80, v1: 0.98 },
        |t| {
            let w = smoothstep(t / 0.6);
            alloc::vec![
                SkinWeight { joint: J_ROOT, weight: 1.0 - w },
                SkinWeight { joint: J_NECK, weight: w },
            ]
        },
    );
    bld.ellipsoid(
        head_center,
        head_semi,
        config.head_stacks,
        config.head_segments,
        UvRect { u0: 0.31, u1: 0.59, v0: 0.80, v1: 0.98 },
        |_| alloc::vec![SkinWeight { joint: J_HEAD, weight: 1.0 }],
    );
    bld.cylinder(
        tail_start,
        tail_dir,
        config.tail_length,
        config.tail_radius,
        config.tail_rings,
        config.tail_segments,
        UvRect { u0: 0.63, u1: 0.83, v0: 0.80, v1: 0.98 },
        |_| alloc::vec![SkinWeight { joint: J_ROOT, weight: 1.0 }],
    );

    // Skeleton.
    let mut joints = Vec::new();
    joints.push(Joint { name: "root".to_string(), parent: None, rest_offset: Vector3::zeros() });
    joints.push(Joint { name: "neck".to_string(), parent: Some(J_ROOT), rest_offset: neck_base.coords });
    joints.push(Joint {
        name: "head".to_string(),
        parent: Some(J_NECK),
        rest_offset: neck_dir * config.neck_length,
    });
    let leg_names = ["fl", "fr", "hl", "hr"];
    for (leg, attach) in leg_attach.iter().enumerate() {
        joints.push(Joint {
            name: format!("leg_{}_upper", leg_names[leg]),
            parent: Some(J_ROOT),
            rest_offset: attach.coords,
        });
        if two {
            joints.push(Joint {
                name: format!("leg_{}_lower", leg_names[leg]),
                parent: Some(leg_upper(leg, two)),
                rest_offset: Vector3::new(0.0, config.leg_length * 0.5, 0.0),
            });
        }
    }
    debug_assert_eq!(joints.len(), config.joint_count());

    // Keypoints: nearest mesh vertex to each semantic target point.
    let knee = |leg: usize| leg_attach[leg] + Vector3::new(0.0, config.leg_length * 0.5, 0.0);
    let hoof = |leg: usize| leg_attach[leg] + Vector3::new(0.0, config.leg_length, 0.0);
    let torso_top = |frac: f64| {
        let psi = core::f64::consts::PI * frac;
        Point3::new(a * libm::cos(psi), -b * libm::sin(psi), 0.0)
    };
    let targets: [Point3<f64>; 16] = [
        head_center + Vector3::new(head_semi.x, 0.0, 0.0), // nose
        torso_top(0.30),                                   // withers
        torso_top(0.75),                                   // hip_top
        Point3::new(-a, 0.0, 0.0),                         // tail_base
        leg_attach[0] - Vector3::new(0.0, y_attach * 0.5, 0.0), // shoulder_l
        leg_attach[1] - Vector3::new(0.0, y_attach * 0.5, 0.0), // shoulder_r
        leg_attach[2] - Vector3::new(0.0, y_attach * 0.5, 0.0), // hip_l
        leg_attach[3] - Vector3::new(0.0, y_attach * 0.5, 0.0), // hip_r
        knee(0),
        knee(1),
        knee(2),
        knee(3),
        hoof(0),
        hoof(1),
        hoof(2),
        hoof(3),
    ];
    let mut keypoint_ids = Vec::with_capacity(config.keypoint_count);
    for target in targets.iter().take(config.keypoint_count) {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (i, v) in bld.vertices.iter().enumerate() {
            let d = (v - target).norm_squared();
            if d < best_d && !keypoint_ids.contains(&i) {
                best_d = d;
                best = i;
            }
        }
        keypoint_ids.push(best);
    }

    // Shape basis: semantic proportion fields padded to 40 with smooth
    // low-frequency seeded fields.
    let verts = bld.vertices.clone();
    let mut modes: Vec<Vec<Vector3<f64>>> = Vec::with_capacity(SHAPE_MODES);
    let semantic: [&dyn Fn(&Point3<f64>) -> Vector3<f64>; 8] = [
        // body length: stretch along the body axis
        &|p| Vector3::new(0.25 * p.x, 0.0, 0.0),
        // girth: radial scaling around the torso, falling off toward the ends
        &|p| {
            let g = libm::exp(-(p.x / (1.2 * a)).powi(2));
            Vector3::new(0.0, 0.35 * p.y * g, 0.35 * p.z * g)
        },
        // leg length: everything below the attachment line drops
        &|p| Vector3::new(0.0, 0.35 * (p.y - y_attach).max(0.0), 0.0),
        // neck length: the front of the animal extends along the neck axis
        &|p| neck_dir * (0.35 * smoothstep((p.x - 0.6 * a) / (0.3 * a))),
        // head size: radial growth around the head center
        &|p| {
            let d = p - head_center;
            d * (0.5 * libm::exp(-d.norm_squared() / (1.5 * config.head_size).powi(2)))
        },
        // tail length
        &|p| {
            let mid = tail_start + tail_dir * (config.tail_length * 0.5);
            let d2 = (p - mid).norm_squared();
            tail_dir * (0.4 * libm::exp(-d2 / (1.2 * config.tail_length).powi(2)))
        },
        // belly depth
        &|p| Vector3::new(0.0, 0.3 * p.y.max(0.0) * libm::exp(-(p.x / a).powi(2)), 0.0),
        // chest width
        &|p| Vector3::new(0.0, 0.0, 0.3 * p.z * smoothstep((p.x + 0.2 * a) / (0.8 * a))),
    ];
    for f in semantic {
        modes.push(verts.iter().map(f).collect());
    }
    for m in modes.len()..SHAPE_MODES {
        let mut r = rng::substream(PAD_MODE_SEED, m as u64);
        let mut waves = Vec::new();
        for _ in 0..3 {
            let k = random_unit(&mut r) * r.gen_range(0.5..2.5);
            let phase: f64 = r.gen_range(0.0..core::f64::consts::TAU);
            let dir = random_unit(&mut r);
            waves.push((k, phase, dir));
        }
        modes.push(
            verts
                .iter()
                .map(|p| {
                    let mut d = Vector3::zeros();
                    for (k, phase, dir) in &waves {
                        d += dir * (0.04 * libm::cos(k.dot(&p.coords) + phase));
                    }
                    d
                })
                .collect(),
        );
    }

    // Center the mesh on its vertex centroid so bbox-based camera
    // initialization has a zero reference point. Displacement fields are
    // translation-invariant and need no adjustment; the root joint keeps its
    // world position at the torso center.
    let centroid = {
        let mut acc = Vector3::zeros();
        for v in &bld.vertices {
            acc += v.coords;
        }
        acc / bld.vertices.len() as f64
    };
    for v in &mut bld.vertices {
        v.coords -= centroid;
    }
    joints[J_ROOT].rest_offset = -centroid;

    // Normalize skin weights exactly.
    let mut skin_weights = Vec::with_capacity(bld.weights.len());
    for ws in bld.weights {
        let mut ws: Vec<SkinWeight> = ws.into_iter().filter(|w| w.weight > 1e-12).collect();
        let sum: f64 = ws.iter().map(|w| w.weight).sum();
        for w in &mut ws {
            w.weight /= sum;
        }
        skin_weights.push(ws);
    }

    let mesh = Mesh { vertices: bld.vertices, faces: bld.faces, uv: bld.uv, keypoint_ids };
    mesh.validate()?;
    let skeleton = Skeleton::new(joints, skin_weights)?;
    let basis = ShapeBasis { modes };
    basis.validate(mesh.vertices.len())?;
    Ok((mesh, skeleton, basis))
}

fn random_unit(r: &mut rng::Rng) -> Vector3<f64> {
    let z: f64 = r.gen_range(-1.0..1.0);
    let theta: f64 = r.gen_range(0.0..core::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(s * libm::cos(theta), s * libm::sin(theta), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_shape, pose_skeleton, skin, Pose, ShapeCoeffs};
    use alloc::collections::BTreeMap;
    use alloc::vec;

    #[test]
    fn default_template_has_eleven_joints_and_one_root() {
        let (_, sk, _) = make_template(&TemplateConfig::default()).unwrap();
        assert_eq!(sk.joint_count(), 11);
        assert_eq!(sk.joints.iter().filter(|j| j.parent.is_none()).count(), 1);
    }

    #[test]
    fn single_segment_legs_give_seven_joints() {
        let config = TemplateConfig { two_segment_legs: false, ..Default::default() };
        let (_, sk, _) = make_template(&config).unwrap();
        assert_eq!(sk.joint_count(), 7);
    }

    #[test]
    fn basis_has_exactly_forty_modes() {
        let (mesh, _, basis) = make_template(&TemplateConfig::default()).unwrap();
        assert_eq!(basis.modes.len(), 40);
        basis.validate(mesh.vertices.len()).unwrap();
    }

    #[test]
    fn same_config_is_bit_identical() {
        let a = make_template(&TemplateConfig::default()).unwrap();
        let b = make_template(&TemplateConfig::default()).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2.modes, b.2.modes);
    }

    #[test]
    fn invalid_proportions_are_rejected() {
        let config = TemplateConfig { girth: 0.0, ..Default::default() };
        assert!(make_template(&config).is_err());
        let config = TemplateConfig { leg_length: -1.0, ..Default::default() };
        assert!(make_template(&config).is_err());
    }

    #[test]
    fn keypoints_are_distinct_and_complete() {
        let (mesh, _, _) = make_template(&TemplateConfig::default()).unwrap();
        assert_eq!(mesh.keypoint_ids.len(), 16);
        mesh.validate().unwrap();
    }

    #[test]
    fn centroid_is_at_origin() {
        let (mesh, _, _) = make_template(&TemplateConfig::default()).unwrap();
        assert!(mesh.centroid().coords.norm() < 1e-9);
    }

    #[test]
    fn body_length_mode_strictly_grows_the_bounding_box() {
        let (mesh, _, basis) = make_template(&TemplateConfig::default()).unwrap();
        let extent = |s: f64| {
            let mut beta = ShapeCoeffs::zeros();
            beta.beta[0] = s;
            let m = apply_shape(&mesh, &basis, &beta).unwrap();
            m.aabb().unwrap().extent().x
        };
        let (e0, e1, e2) = (extent(0.0), extent(0.5), extent(1.0));
        assert!(e0 < e1 && e1 < e2, "{e0} {e1} {e2}");
    }

    #[test]
    fn every_part_is_geometrically_closed() {
        // Each boundary edge (used by exactly one face) must coincide with a
        // reverse boundary edge at the same positions: the UV seam duplicates
        // vertices but the surface stays closed.
        let (mesh, _, _) = make_template(&TemplateConfig::default()).unwrap();
        let quant = |p: &Point3<f64>| {
            let q = |x: f64| libm::round(x * 1e9) as i64;
            (q(p.x), q(p.y), q(p.z))
        };
        let mut counts: BTreeMap<((i64, i64, i64), (i64, i64, i64)), i64> = BTreeMap::new();
        for f in &mesh.faces {
            for e in 0..3 {
                let p0 = quant(&mesh.vertices[f[e]]);
                let p1 = quant(&mesh.vertices[f[(e + 1) % 3]]);
                // Count directed edges; a closed surface has every undirected
                // geometric edge traversed once in each direction.
                *counts.entry((p0, p1)).or_insert(0) += 1;
                *counts.entry((p1, p0)).or_insert(0) -= 1;
            }
        }
        assert!(counts.values().all(|&c| c == 0), "unbalanced geometric edges");
    }

    #[test]
    fn zero_pose_and_zero_shape_reproduce_the_template() {
        let (mesh, sk, basis) = make_template(&TemplateConfig::default()).unwrap();
        let shaped = apply_shape(&mesh, &basis, &ShapeCoeffs::zeros()).unwrap();
        let t = pose_skeleton(&sk, &Pose::rest(sk.joint_count())).unwrap();
        let skinned = skin(&shaped, &sk, &t).unwrap();
        for (a, b) in skinned.vertices.iter().zip(mesh.vertices.iter()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn apply_shape_is_linear() {
        let (mesh, _, basis) = make_template(&TemplateConfig::default()).unwrap();
        let mut r = crate::rng::seeded(42);
        for _ in 0..5 {
            let b1 = ShapeCoeffs::new((0..40).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap();
            let b2 = ShapeCoeffs::new((0..40).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap();
            let sum =
                ShapeCoeffs::new(b1.beta.iter().zip(&b2.beta).map(|(a, b)| a + b).collect()).unwrap();
            let m1 = apply_shape(&mesh, &basis, &b1).unwrap();
            let m2 = apply_shape(&mesh, &basis, &b2).unwrap();
            let ms = apply_shape(&mesh, &basis, &sum).unwrap();
            for i in 0..mesh.vertices.len() {
                let lhs = ms.vertices[i].coords;
                let rhs = m1.vertices[i].coords + m2.vertices[i].coords - mesh.vertices[i].coords;
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_beta_is_identity() {
        let (mesh, _, basis) = make_template(&TemplateConfig::default()).unwrap();
        let out = apply_shape(&mesh, &basis, &ShapeCoeffs::zeros()).unwrap();
        assert_eq!(out.vertices, mesh.vertices);
    }

    #[test]
    fn beta_length_mismatch_is_dimension_error() {
        let (mesh, _, basis) = make_template(&TemplateConfig::default()).unwrap();
        let bad = ShapeCoeffs { beta: vec![0.0; 39] };
        assert!(matches!(apply_shape(&mesh, &basis, &bad), Err(CoreError::Dimension(_))));
    }

}
