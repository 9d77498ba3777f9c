//! Articulated 3D quadruped model.
//!
//! Coordinate conventions: right-handed model space, `+x` forward (nose),
//! `+y` down (legs), so the animal's right side faces `-z`. The camera sits
//! at the origin looking down `+z`, image origin top-left with y down, and
//! pixel centers at integer + 0.5.

mod camera;
mod mesh;
mod model;
mod rotation;
mod shape;
mod skeleton;
mod template;

pub use camera::Camera;
pub use mesh::{Aabb, Mesh};
pub use model::Model;
pub use rotation::{rodrigues, rodrigues_jacobian, skew};
pub use shape::{apply_shape, ShapeBasis, ShapeCoeffs, SHAPE_MODES};
pub use skeleton::{
    pose_skeleton, skin, skin_points, Affine, Joint, JointTransforms, Pose, Skeleton, SkinWeight,
};
pub use template::{make_template, TemplateConfig, KEYPOINT_NAMES};
