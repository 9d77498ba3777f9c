//! Minimal in-memory 8-bit RGB image, shared by the renderer, the synthetic
//! data generator and back-projection. PNG encoding lives in the pipeline
//! crate.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, pixels: vec![[0; 3]; width * height] }
    }

    pub fn filled(width: usize, height: usize, value: [u8; 3]) -> Self {
        Self { width, height, pixels: vec![value; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: [u8; 3]) {
        self.pixels[y * self.width + x] = value;
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centers at
    /// integer + 0.5), clamped at the borders. Returns channels in [0,1].
    pub fn sample_bilinear(&self, x: f64, y: f64) -> [f64; 3] {
        let fx = (x - 0.5).clamp(0.0, (self.width - 1) as f64);
        let fy = (y - 0.5).clamp(0.0, (self.height - 1) as f64);
        let x0 = fx as usize;
        let y0 = fy as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = fx - x0 as f64;
        let ty = fy - y0 as f64;
        let mut out = [0.0; 3];
        for c in 0..3 {
            let p00 = self.get(x0, y0)[c] as f64;
            let p10 = self.get(x1, y0)[c] as f64;
            let p01 = self.get(x0, y1)[c] as f64;
            let p11 = self.get(x1, y1)[c] as f64;
            let top = p00 + (p10 - p00) * tx;
            let bot = p01 + (p11 - p01) * tx;
            out[c] = (top + (bot - top) * ty) / 255.0;
        }
        out
    }
}
