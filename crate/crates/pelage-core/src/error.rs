//! Error type shared by all core modules.

use alloc::string::String;

/// Errors produced by core operations.
///
/// Variants map to the failure modes of the individual pipeline stages;
/// recoverable conditions (e.g. a fit that did not converge, or an empty
/// back-projection) are reported through result values, not errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    /// Invalid configuration value (non-positive proportion, bad counts, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// Mismatched dimensions between related inputs.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A point at or behind the camera plane cannot be projected.
    #[error("projection error: {0}")]
    Projection(String),
    /// Rasterization cannot proceed (vertex behind the camera; no clipping).
    #[error("render error: {0}")]
    Render(String),
    /// Fit initialization failed (degenerate bounding box).
    #[error("initialization error: {0}")]
    Init(String),
    /// An energy with no visible keypoints and no silhouette is underconstrained.
    #[error("underconstrained: {0}")]
    Underconstrained(String),
    /// Out-of-range region or index.
    #[error("bounds error: {0}")]
    Bounds(String),
    /// A metric is undefined on the given input (e.g. PCK with no visible keypoints).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    /// Invalid input value to an operation.
    #[error("input error: {0}")]
    Input(String),
    /// Empty chip (no valid pixels).
    #[error("empty chip: {0}")]
    EmptyChip(String),
    /// The species gate could not obtain a usable prediction.
    #[error("gate error: {0}")]
    Gate(String),
    /// A batch from which no triplet can be mined.
    #[error("no triplet: {0}")]
    NoTriplet(String),
    /// The training dataset does not satisfy the trainer preconditions.
    #[error("dataset error: {0}")]
    Dataset(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, CoreError>;
