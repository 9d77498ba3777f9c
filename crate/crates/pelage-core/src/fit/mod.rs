//! Model fitting: recover pose, shape and camera translation from 2D
//! observations by staged Levenberg–Marquardt on an explicit energy.

mod energy;
mod lm;
mod observation;
mod pck;

pub use energy::{Energy, EnergyWeights, ParamLayout};
pub use lm::{LmOptions, LmOutcome};
pub use observation::{Observation, ObservedKeypoint};
pub use pck::pck;

use alloc::format;
use nalgebra::{Point2, Vector3};

use crate::error::{CoreError, Result};
use crate::geometry::{Camera, Model, Pose, ShapeCoeffs};

/// Recovered parameters of one sighting.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub pose: Pose,
    pub shape: ShapeCoeffs,
    pub camera: Camera,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Knobs of the staged fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub weights: EnergyWeights,
    /// Focal length used when no init seed provides a camera.
    pub focal: f64,
    /// Enable the one-directional chamfer silhouette term (needs a mask).
    pub use_silhouette: bool,
    pub boundary_samples: usize,
    /// Central-difference step for the silhouette-term Jacobian.
    pub silhouette_fd_step: f64,
    pub max_iterations: usize,
    /// Relative cost decrease below which a stage stops.
    pub tolerance: f64,
    pub initial_damping: f64,
    /// Iteration budgets of the translation-only and translation+root stages.
    pub stage1_iterations: usize,
    pub stage2_iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            weights: EnergyWeights::default(),
            focal: 300.0,
            use_silhouette: false,
            boundary_samples: 64,
            silhouette_fd_step: 0.02,
            max_iterations: 200,
            tolerance: 1e-8,
            initial_damping: 1e-3,
            stage1_iterations: 25,
            stage2_iterations: 40,
        }
    }
}

/// Initialize the camera from a bounding box by similar triangles:
/// `z = focal * template_height / bbox_height`, with x/y chosen so the
/// template centroid (the model origin) projects onto the bbox center.
pub fn init_camera_from_bbox(
    bbox: [f64; 4],
    template_height: f64,
    focal: f64,
    image_size: (usize, usize),
) -> Result<Camera> {
    let [x1, y1, x2, y2] = bbox;
    let (w, h) = (x2 - x1, y2 - y1);
    if !(w > 0.0 && h > 0.0) {
        return Err(CoreError::Init(format!("degenerate bbox {bbox:?}")));
    }
    let principal = Point2::new(image_size.0 as f64 / 2.0, image_size.1 as f64 / 2.0);
    let z = focal * template_height / h;
    let tx = (0.5 * (x1 + x2) - principal.x) * z / focal;
    let ty = (0.5 * (y1 + y2) - principal.y) * z / focal;
    Camera::new(focal, principal, Vector3::new(tx, ty, z))
}

/// Fit the model to an observation.
///
/// Stages: (1) translation only, (2) translation + root rotation,
/// (3) all parameters. Keypoint and prior Jacobians are analytic; the
/// optional silhouette term is differentiated by central differences.
/// A diverged fit (damping at cap) returns `converged = false`, not an error.
pub fn fit_model(
    model: &Model,
    obs: &Observation,
    init: Option<&FitResult>,
    config: &FitConfig,
) -> Result<FitResult> {
    obs.validate()?;
    let visible = obs.keypoints.iter().filter(|k| k.visible).count();
    let with_sil = config.use_silhouette && obs.silhouette.is_some();
    if visible == 0 && !with_sil {
        return Err(CoreError::Underconstrained(
            "no visible keypoints and no silhouette".into(),
        ));
    }

    let camera = match init {
        Some(seed) => seed.camera,
        None => init_camera_from_bbox(obs.bbox, model.height(), config.focal, obs.image_size)?,
    };
    let pose = init.map(|s| s.pose.clone()).unwrap_or_else(|| Pose::rest(model.joint_count()));
    let shape = init.map(|s| s.shape.clone()).unwrap_or_else(ShapeCoeffs::zeros);

    let energy = Energy::with_intrinsics(model, obs, config, camera.focal, camera.principal_point)?;
    let layout = energy.layout();
    let mut x = layout.pack(&pose, &shape, &camera.translation);

    let opts = LmOptions {
        tolerance: config.tolerance,
        initial_damping: config.initial_damping,
        damping_cap: 1e10,
    };

    let stages: [(alloc::vec::Vec<usize>, usize); 3] = [
        (layout.translation_indices(), config.stage1_iterations),
        (layout.translation_root_indices(), config.stage2_iterations),
        ((0..layout.len()).collect(), usize::MAX),
    ];
    let mut iterations = 0usize;
    let mut outcome = LmOutcome { cost: f64::INFINITY, iterations: 0, converged: false };
    for (active, stage_budget) in stages {
        let remaining = config.max_iterations.saturating_sub(iterations);
        let budget = stage_budget.min(remaining);
        outcome = lm::minimize(&energy, &mut x, &active, budget, &opts);
        iterations += outcome.iterations;
        if iterations >= config.max_iterations {
            break;
        }
    }

    let (pose, shape, translation) = layout.unpack(&x);
    let camera = Camera { focal: camera.focal, principal_point: camera.principal_point, translation };
    Ok(FitResult {
        pose: pose.canonicalized(),
        shape,
        camera,
        final_cost: outcome.cost,
        iterations,
        converged: outcome.converged,
    })
}

/// Project the model keypoints under a fit result.
pub fn project_keypoints(model: &Model, fit: &FitResult) -> Result<alloc::vec::Vec<Point2<f64>>> {
    let pts = model.posed_keypoints(&fit.pose, &fit.shape)?;
    pts.iter().map(|p| fit.camera.project(p)).collect()
}
