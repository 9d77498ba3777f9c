//! Core algorithms for 3D-aware animal re-identification from coat patterns.
//!
//! The crate is organized around the stages of the identification pipeline:
//!
//! - [`geometry`] — articulated quadruped template: shape deformation basis,
//!   forward kinematics, linear blend skinning, pinhole projection.
//! - [`render`] — software rasterizer (silhouette / depth / face / UV buffers)
//!   and an exact Euclidean distance transform.
//! - [`fit`] — recovery of pose, shape and camera translation from 2D
//!   keypoints (and optionally a silhouette) by Levenberg–Marquardt.
//! - [`texture`] — back-projection of observed pixels into a pose- and
//!   viewpoint-normalized UV atlas, plus pattern-chip cropping.
//! - [`roi`] — detection filtering, species gating and average-precision
//!   evaluation.
//! - [`synth`] — deterministic synthetic population generator (striped coat
//!   atlases, rendered sightings with ground truth, offline augmentation).
//! - [`metric`] — small embedding network trained with SoftMax + reciprocal
//!   triplet loss and batch-hard mining, with hand-built reverse mode.
//! - [`identity`] — identity database, kNN classification and 2D export.
//!
//! Everything here is pure computation over in-memory values; file formats,
//! image codecs and the CLI live in the companion `pelage-pipeline` crate.
//! The crate is `no_std`-compatible (with `alloc`) when built without the
//! default `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod fit;
pub mod geometry;
pub mod identity;
pub mod metric;
pub mod render;
pub mod rng;
pub mod roi;
pub mod synth;
pub mod texture;

pub use error::CoreError;
