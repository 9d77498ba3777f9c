//! Pose/viewpoint-normalized texture extraction.

mod atlas;
mod chip;
mod imagebuf;

pub use atlas::{backproject, BackprojectOutcome, TextureMap, ATLAS_RESOLUTION};
pub use chip::{crop_region, normalize_chip, resample_chip, PatternChip, ResampledChip, UvRegion};
pub use imagebuf::RgbImage;
