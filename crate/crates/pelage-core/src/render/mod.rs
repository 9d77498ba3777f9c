//! Software rasterization and silhouette distance fields.

mod distance;
mod raster;

pub use distance::distance_transform;
pub use raster::{rasterize, RenderBuffers, BACKGROUND_FACE};
