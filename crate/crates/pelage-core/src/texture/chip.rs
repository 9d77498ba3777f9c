//! Pattern chips: crops of the normalized atlas used for identification.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

use super::atlas::TextureMap;

/// Axis-aligned UV rectangle, `u1 < u2`, `v1 < v2`, inside `[0,1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvRegion {
    pub u1: f64,
    pub v1: f64,
    pub u2: f64,
    pub v2: f64,
}

/// Default hindquarter+back crop of the procedural atlas.
impl Default for UvRegion {
    fn default() -> Self {
        Self { u1: 0.55, v1: 0.25, u2: 0.95, v2: 0.75 }
    }
}

impl UvRegion {
    fn validate(&self) -> Result<()> {
        let inside = (0.0..=1.0).contains(&self.u1)
            && (0.0..=1.0).contains(&self.u2)
            && (0.0..=1.0).contains(&self.v1)
            && (0.0..=1.0).contains(&self.v2);
        if !inside || self.u1 >= self.u2 || self.v1 >= self.v2 {
            return Err(CoreError::Bounds(format!("invalid uv region {self:?}")));
        }
        Ok(())
    }
}

/// Cropped (and possibly normalized) pattern patch with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternChip {
    pub width: usize,
    pub height: usize,
    /// Per-pixel channels; raw [0,1] colors before normalization, standardized
    /// values afterwards. Invalid pixels are 0 after normalization.
    pub pixels: Vec<[f64; 3]>,
    pub mask: Vec<bool>,
    pub source_region: UvRegion,
}

impl PatternChip {
    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Mean absolute per-channel difference over pixels valid in both chips.
    pub fn mean_abs_diff(&self, other: &PatternChip) -> Option<f64> {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let mut sum = 0.0;
        let mut n = 0usize;
        for i in 0..self.pixels.len() {
            if self.mask[i] && other.mask[i] {
                for c in 0..3 {
                    sum += (self.pixels[i][c] - other.pixels[i][c]).abs();
                }
                n += 3;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }
}

/// Crop a UV rectangle out of the atlas at texel granularity.
///
/// The chip is `round(extent * resolution)` texels per side; visibility is
/// copied along with the colors. Values are not normalized.
pub fn crop_region(texture: &TextureMap, region: UvRegion) -> Result<PatternChip> {
    region.validate()?;
    let r = texture.resolution as f64;
    let x0 = libm::round(region.u1 * r) as usize;
    let y0 = libm::round(region.v1 * r) as usize;
    let width = (libm::round((region.u2 - region.u1) * r) as usize).min(texture.resolution - x0).max(1);
    let height = (libm::round((region.v2 - region.v1) * r) as usize).min(texture.resolution - y0).max(1);
    let mut pixels = Vec::with_capacity(width * height);
    let mut mask = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let t = (y0 + y) * texture.resolution + (x0 + x);
            pixels.push(texture.color[t]);
            mask.push(texture.visibility[t]);
        }
    }
    Ok(PatternChip { width, height, pixels, mask, source_region: region })
}

/// Standardize each channel over the valid pixels (population statistics);
/// invalid pixels become 0, and a constant channel maps to all zeros.
pub fn normalize_chip(chip: &PatternChip) -> Result<PatternChip> {
    let n = chip.valid_count();
    if n == 0 {
        return Err(CoreError::EmptyChip("chip has no valid pixels".into()));
    }
    let mut mean = [0.0f64; 3];
    for (p, &m) in chip.pixels.iter().zip(chip.mask.iter()) {
        if m {
            for c in 0..3 {
                mean[c] += p[c];
            }
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = [0.0f64; 3];
    for (p, &m) in chip.pixels.iter().zip(chip.mask.iter()) {
        if m {
            for c in 0..3 {
                var[c] += (p[c] - mean[c]) * (p[c] - mean[c]);
            }
        }
    }
    let mut std = [0.0f64; 3];
    for c in 0..3 {
        std[c] = (var[c] / n as f64).sqrt();
    }
    let mut out = chip.clone();
    for (p, &m) in out.pixels.iter_mut().zip(chip.mask.iter()) {
        for c in 0..3 {
            p[c] = if m && std[c] > 1e-12 { (p[c] - mean[c]) / std[c] } else { 0.0 };
        }
    }
    Ok(out)
}

/// Chip resampled to a fixed grid for the embedding network, with the mask
/// carried as a continuous coverage channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledChip {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
    /// Bilinear coverage of valid source pixels, in [0,1].
    pub coverage: Vec<f64>,
}

/// Bilinear resample of a chip to `width x height`.
///
/// Values are sampled from `pixel * mask` with the mask interpolated
/// separately, so holes stay visible to downstream consumers.
pub fn resample_chip(chip: &PatternChip, width: usize, height: usize) -> ResampledChip {
    let mut pixels = vec![[0.0; 3]; width * height];
    let mut coverage = vec![0.0; width * height];
    let sx = chip.width as f64 / width as f64;
    let sy = chip.height as f64 / height as f64;
    for oy in 0..height {
        for ox in 0..width {
            // Source position of the output pixel center.
            let x = (ox as f64 + 0.5) * sx - 0.5;
            let y = (oy as f64 + 0.5) * sy - 0.5;
            let x0f = x.floor();
            let y0f = y.floor();
            let tx = x - x0f;
            let ty = y - y0f;
            let x0 = (x0f.max(0.0) as usize).min(chip.width - 1);
            let y0 = (y0f.max(0.0) as usize).min(chip.height - 1);
            let x1 = (x0 + 1).min(chip.width - 1);
            let y1 = (y0 + 1).min(chip.height - 1);
            let w = [(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty];
            let ids = [y0 * chip.width + x0, y0 * chip.width + x1, y1 * chip.width + x0, y1 * chip.width + x1];
            let o = oy * width + ox;
            for (wk, id) in w.iter().zip(ids.iter()) {
                let m = if chip.mask[*id] { 1.0 } else { 0.0 };
                coverage[o] += wk * m;
                for c in 0..3 {
                    pixels[o][c] += wk * m * chip.pixels[*id][c];
                }
            }
        }
    }
    ResampledChip { width, height, pixels, coverage }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chip_from(values: &[f64]) -> PatternChip {
        PatternChip {
            width: values.len(),
            height: 1,
            pixels: values.iter().map(|&v| [v, v, v]).collect(),
            mask: vec![true; values.len()],
            source_region: UvRegion::default(),
        }
    }

    #[test]
    fn full_region_is_identity_crop() {
        let tex = TextureMap::from_fn(256, |u, v| [u, v, 0.0]);
        let chip = crop_region(&tex, UvRegion { u1: 0.0, v1: 0.0, u2: 1.0, v2: 1.0 }).unwrap();
        assert_eq!((chip.width, chip.height), (256, 256));
        assert_eq!(chip.pixels[0], tex.color[0]);
        assert_eq!(chip.pixels.len(), tex.color.len());
    }

    #[test]
    fn default_region_is_102_by_128() {
        let tex = TextureMap::from_fn(256, |_, _| [0.5; 3]);
        let chip = crop_region(&tex, UvRegion::default()).unwrap();
        assert_eq!((chip.width, chip.height), (102, 128));
    }

    #[test]
    fn inverted_region_is_bounds_error() {
        let tex = TextureMap::from_fn(16, |_, _| [0.0; 3]);
        let bad = UvRegion { u1: 0.8, v1: 0.2, u2: 0.4, v2: 0.6 };
        assert!(matches!(crop_region(&tex, bad), Err(CoreError::Bounds(_))));
        let outside = UvRegion { u1: -0.1, v1: 0.0, u2: 0.5, v2: 0.5 };
        assert!(matches!(crop_region(&tex, outside), Err(CoreError::Bounds(_))));
    }

    #[test]
    fn two_pixel_standardization() {
        // Population statistics: {10, 20} -> {-1, +1}.
        let chip = chip_from(&[10.0, 20.0]);
        let norm = normalize_chip(&chip).unwrap();
        assert!((norm.pixels[0][0] + 1.0).abs() < 1e-12);
        assert!((norm.pixels[1][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_chip_normalizes_to_zero() {
        let chip = chip_from(&[3.0, 3.0, 3.0]);
        let norm = normalize_chip(&chip).unwrap();
        assert!(norm.pixels.iter().all(|p| p.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn normalization_is_affine_invariant() {
        let base = chip_from(&[0.1, 0.5, 0.9, 0.3]);
        let scaled = chip_from(&[0.1 * 2.5 + 0.3, 0.5 * 2.5 + 0.3, 0.9 * 2.5 + 0.3, 0.3 * 2.5 + 0.3]);
        let a = normalize_chip(&base).unwrap();
        let b = normalize_chip(&scaled).unwrap();
        for (pa, pb) in a.pixels.iter().zip(b.pixels.iter()) {
            for c in 0..3 {
                assert!((pa[c] - pb[c]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn empty_chip_is_an_error() {
        let mut chip = chip_from(&[1.0, 2.0]);
        chip.mask = vec![false, false];
        assert!(matches!(normalize_chip(&chip), Err(CoreError::EmptyChip(_))));
    }

    #[test]
    fn invalid_pixels_are_zeroed_and_excluded_from_stats() {
        let mut chip = chip_from(&[10.0, 20.0, 500.0]);
        chip.mask[2] = false;
        let norm = normalize_chip(&chip).unwrap();
        assert!((norm.pixels[0][0] + 1.0).abs() < 1e-12);
        assert!((norm.pixels[1][0] - 1.0).abs() < 1e-12);
        assert_eq!(norm.pixels[2], [0.0; 3]);
    }

    #[test]
    fn resample_identity_size_preserves_values() {
        let chip = chip_from(&[0.2, 0.4, 0.8]);
        let r = resample_chip(&chip, 3, 1);
        for (p, q) in r.pixels.iter().zip(chip.pixels.iter()) {
            assert!((p[0] - q[0]).abs() < 1e-12);
        }
        assert!(r.coverage.iter().all(|&c| (c - 1.0).abs() < 1e-12));
    }
}
