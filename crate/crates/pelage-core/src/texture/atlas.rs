//! UV texture atlas and back-projection.

use alloc::vec;
use alloc::vec::Vec;

use crate::fit::FitResult;
use crate::geometry::Model;
use crate::render::rasterize;

use super::imagebuf::RgbImage;

/// Default atlas resolution (texels per side).
pub const ATLAS_RESOLUTION: usize = 256;

/// Square RGB texture atlas with per-texel visibility.
///
/// Colors are stored in [0,1]; a texel is visible iff at least one image
/// pixel was splatted into it (`sample_count >= 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct TextureMap {
    pub resolution: usize,
    pub color: Vec<[f64; 3]>,
    pub visibility: Vec<bool>,
    pub sample_count: Vec<u32>,
}

impl TextureMap {
    pub fn empty(resolution: usize) -> Self {
        let n = resolution * resolution;
        Self {
            resolution,
            color: vec![[0.0; 3]; n],
            visibility: vec![false; n],
            sample_count: vec![0; n],
        }
    }

    /// Fully visible atlas computed from a per-texel function of the texel
    /// center UV coordinates.
    pub fn from_fn(resolution: usize, mut f: impl FnMut(f64, f64) -> [f64; 3]) -> Self {
        let n = resolution * resolution;
        let mut color = Vec::with_capacity(n);
        for ty in 0..resolution {
            for tx in 0..resolution {
                let u = (tx as f64 + 0.5) / resolution as f64;
                let v = (ty as f64 + 0.5) / resolution as f64;
                color.push(f(u, v));
            }
        }
        Self { resolution, color, visibility: vec![true; n], sample_count: vec![1; n] }
    }

    /// Texel column/row addressed by a UV coordinate (nearest texel).
    #[inline]
    pub fn texel_of(&self, u: f64, v: f64) -> (usize, usize) {
        let r = self.resolution as f64;
        let tx = (u * r).floor().clamp(0.0, r - 1.0) as usize;
        let ty = (v * r).floor().clamp(0.0, r - 1.0) as usize;
        (tx, ty)
    }

    /// Nearest-texel color lookup; invisible texels read as mid-gray.
    pub fn sample_nearest(&self, u: f64, v: f64) -> [f64; 3] {
        let (tx, ty) = self.texel_of(u, v);
        let idx = ty * self.resolution + tx;
        if self.visibility[idx] {
            self.color[idx]
        } else {
            [0.5, 0.5, 0.5]
        }
    }

    pub fn visible_count(&self) -> usize {
        self.visibility.iter().filter(|&&v| v).count()
    }

    /// Mean absolute color difference against another atlas over texels
    /// visible in both, in [0,1] units; `None` when nothing is jointly visible.
    pub fn mean_abs_diff(&self, other: &TextureMap) -> Option<f64> {
        assert_eq!(self.resolution, other.resolution);
        let mut sum = 0.0;
        let mut n = 0usize;
        for i in 0..self.color.len() {
            if self.visibility[i] && other.visibility[i] {
                for c in 0..3 {
                    sum += (self.color[i][c] - other.color[i][c]).abs();
                }
                n += 3;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }
}

/// Result of back-projecting one image through a fitted model.
#[derive(Debug, Clone)]
pub struct BackprojectOutcome {
    pub texture: TextureMap,
    /// Set when the fitted model did not rasterize inside the image (the
    /// result then has empty visibility).
    pub degenerate: bool,
}

/// Back-project an observed image into the model's UV atlas.
///
/// The fitted model is rasterized at image size; every foreground pixel
/// splats its color into the texel addressed by the pixel's interpolated UV.
/// Accumulation is exact (integer sums), so texel values are independent of
/// pixel visitation order. Texels receiving no samples stay invisible.
pub fn backproject(
    image: &RgbImage,
    model: &Model,
    fit: &FitResult,
    resolution: usize,
) -> crate::error::Result<BackprojectOutcome> {
    let posed = model.posed_mesh(&fit.pose, &fit.shape)?;
    let buffers = match rasterize(&posed, &fit.camera, (image.width, image.height), None, None) {
        Ok(b) => b,
        // A model fully or partly behind the camera is a degenerate fit, not
        // a hard failure: the texture simply stays empty.
        Err(crate::error::CoreError::Render(_)) => {
            return Ok(BackprojectOutcome { texture: TextureMap::empty(resolution), degenerate: true })
        }
        Err(e) => return Err(e),
    };

    let mut sums = vec![[0u64; 3]; resolution * resolution];
    let mut counts = vec![0u32; resolution * resolution];
    let mut texture = TextureMap::empty(resolution);
    for y in 0..image.height {
        for x in 0..image.width {
            let idx = y * image.width + x;
            if !buffers.silhouette[idx] {
                continue;
            }
            let [u, v] = buffers.uv[idx];
            let (tx, ty) = texture.texel_of(u, v);
            let t = ty * resolution + tx;
            let px = image.get(x, y);
            for c in 0..3 {
                sums[t][c] += px[c] as u64;
            }
            counts[t] += 1;
        }
    }
    let mut any = false;
    for t in 0..resolution * resolution {
        if counts[t] > 0 {
            any = true;
            texture.visibility[t] = true;
            texture.sample_count[t] = counts[t];
            for c in 0..3 {
                texture.color[t][c] = sums[t][c] as f64 / counts[t] as f64 / 255.0;
            }
        }
    }
    Ok(BackprojectOutcome { texture, degenerate: !any })
}
