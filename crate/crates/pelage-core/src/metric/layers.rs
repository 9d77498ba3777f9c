//! Network building blocks with explicit forward/backward passes.
//!
//! Feature maps are dense `[channels][height][width]` f64 buffers. Inner
//! loops run over contiguous rows; reductions use fixed four-way
//! accumulation so results are identical run to run.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng as _;

use crate::rng::Rng;

/// Fixed-order dot product (deterministic, vectorizable).
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in 4 * chunks..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// 3x3 convolution, stride 1, zero padding 1 (same-size output).
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_ch: usize,
    pub out_ch: usize,
    /// `[out_ch][in_ch][3][3]` row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn zeros(in_ch: usize, out_ch: usize) -> Self {
        Self { in_ch, out_ch, weight: vec![0.0; out_ch * in_ch * 9], bias: vec![0.0; out_ch] }
    }

    /// Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    pub fn init(in_ch: usize, out_ch: usize, rng: &mut Rng) -> Self {
        let mut layer = Self::zeros(in_ch, out_ch);
        let bound = 1.0 / ((in_ch * 9) as f64).sqrt();
        for w in &mut layer.weight {
            *w = rng.gen_range(-bound..bound);
        }
        for b in &mut layer.bias {
            *b = rng.gen_range(-bound..bound);
        }
        layer
    }

    #[inline]
    fn w(&self, oc: usize, ic: usize, ky: usize, kx: usize) -> f64 {
        self.weight[((oc * self.in_ch + ic) * 3 + ky) * 3 + kx]
    }

    /// Zero-pad `[C][h][w]` by one pixel on each side.
    fn pad(input: &[f64], ch: usize, h: usize, w: usize) -> Vec<f64> {
        let (ph, pw) = (h + 2, w + 2);
        let mut out = vec![0.0; ch * ph * pw];
        for c in 0..ch {
            for y in 0..h {
                let src = c * h * w + y * w;
                let dst = c * ph * pw + (y + 1) * pw + 1;
                out[dst..dst + w].copy_from_slice(&input[src..src + w]);
            }
        }
        out
    }

    /// Forward pass on a `[in_ch][h][w]` input; output `[out_ch][h][w]`.
    pub fn forward(&self, input: &[f64], h: usize, w: usize) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.in_ch * h * w);
        let padded = Self::pad(input, self.in_ch, h, w);
        let pw = w + 2;
        let mut out = vec![0.0; self.out_ch * h * w];
        for oc in 0..self.out_ch {
            let plane = &mut out[oc * h * w..(oc + 1) * h * w];
            let b = self.bias[oc];
            for v in plane.iter_mut() {
                *v = b;
            }
            for ic in 0..self.in_ch {
                let ipad = &padded[ic * (h + 2) * pw..];
                for ky in 0..3 {
                    let w0 = self.w(oc, ic, ky, 0);
                    let w1 = self.w(oc, ic, ky, 1);
                    let w2 = self.w(oc, ic, ky, 2);
                    for y in 0..h {
                        let row = &ipad[(y + ky) * pw..(y + ky) * pw + pw];
                        let orow = &mut plane[y * w..(y + 1) * w];
                        for x in 0..w {
                            orow[x] += w0 * row[x] + w1 * row[x + 1] + w2 * row[x + 2];
                        }
                    }
                }
            }
        }
        out
    }

    /// Backward pass: gradient w.r.t. input, plus accumulation of weight and
    /// bias gradients into `gw`/`gb` (same layouts as `weight`/`bias`).
    pub fn backward(
        &self,
        input: &[f64],
        grad_out: &[f64],
        h: usize,
        w: usize,
        gw: &mut [f64],
        gb: &mut [f64],
    ) -> Vec<f64> {
        let padded = Self::pad(input, self.in_ch, h, w);
        let pw = w + 2;
        let ph = h + 2;

        // Bias gradients.
        for oc in 0..self.out_ch {
            let plane = &grad_out[oc * h * w..(oc + 1) * h * w];
            let mut acc = [0.0f64; 4];
            let chunks = plane.len() / 4;
            for i in 0..chunks {
                let j = 4 * i;
                acc[0] += plane[j];
                acc[1] += plane[j + 1];
                acc[2] += plane[j + 2];
                acc[3] += plane[j + 3];
            }
            let mut tail = 0.0;
            for v in &plane[4 * chunks..] {
                tail += v;
            }
            gb[oc] += (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
        }

        // Weight gradients: correlation of grad_out rows with padded input rows.
        for oc in 0..self.out_ch {
            let gplane = &grad_out[oc * h * w..(oc + 1) * h * w];
            for ic in 0..self.in_ch {
                let ipad = &padded[ic * ph * pw..(ic + 1) * ph * pw];
                for ky in 0..3 {
                    for kx in 0..3 {
                        let mut sum = 0.0;
                        for y in 0..h {
                            let grow = &gplane[y * w..(y + 1) * w];
                            let irow = &ipad[(y + ky) * pw + kx..(y + ky) * pw + kx + w];
                            sum += dot(grow, irow);
                        }
                        gw[((oc * self.in_ch + ic) * 3 + ky) * 3 + kx] += sum;
                    }
                }
            }
        }

        // Input gradients via a padded scatter, then crop.
        let mut gpad = vec![0.0; self.in_ch * ph * pw];
        for oc in 0..self.out_ch {
            let gplane = &grad_out[oc * h * w..(oc + 1) * h * w];
            for ic in 0..self.in_ch {
                let gipad = &mut gpad[ic * ph * pw..(ic + 1) * ph * pw];
                for ky in 0..3 {
                    let w0 = self.w(oc, ic, ky, 0);
                    let w1 = self.w(oc, ic, ky, 1);
                    let w2 = self.w(oc, ic, ky, 2);
                    for y in 0..h {
                        let grow = &gplane[y * w..(y + 1) * w];
                        let prow = &mut gipad[(y + ky) * pw..(y + ky) * pw + pw];
                        for x in 0..w {
                            let g = grow[x];
                            prow[x] += w0 * g;
                            prow[x + 1] += w1 * g;
                            prow[x + 2] += w2 * g;
                        }
                    }
                }
            }
        }
        let mut grad_in = vec![0.0; self.in_ch * h * w];
        for ic in 0..self.in_ch {
            for y in 0..h {
                let src = ic * ph * pw + (y + 1) * pw + 1;
                let dst = ic * h * w + y * w;
                grad_in[dst..dst + w].copy_from_slice(&gpad[src..src + w]);
            }
        }
        grad_in
    }
}

/// Fully connected layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `[out_dim][in_dim]` row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weight: vec![0.0; out_dim * in_dim], bias: vec![0.0; out_dim] }
    }

    pub fn init(in_dim: usize, out_dim: usize, rng: &mut Rng) -> Self {
        let mut layer = Self::zeros(in_dim, out_dim);
        let bound = 1.0 / (in_dim as f64).sqrt();
        for w in &mut layer.weight {
            *w = rng.gen_range(-bound..bound);
        }
        for b in &mut layer.bias {
            *b = rng.gen_range(-bound..bound);
        }
        layer
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.in_dim);
        (0..self.out_dim)
            .map(|o| dot(&self.weight[o * self.in_dim..(o + 1) * self.in_dim], input) + self.bias[o])
            .collect()
    }

    pub fn backward(
        &self,
        input: &[f64],
        grad_out: &[f64],
        gw: &mut [f64],
        gb: &mut [f64],
    ) -> Vec<f64> {
        for o in 0..self.out_dim {
            let g = grad_out[o];
            gb[o] += g;
            let row = &mut gw[o * self.in_dim..(o + 1) * self.in_dim];
            for (r, &x) in row.iter_mut().zip(input.iter()) {
                *r += g * x;
            }
        }
        let mut grad_in = vec![0.0; self.in_dim];
        for o in 0..self.out_dim {
            let g = grad_out[o];
            let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
            for (gi, &w) in grad_in.iter_mut().zip(row.iter()) {
                *gi += g * w;
            }
        }
        grad_in
    }
}

/// In-place ReLU returning the pre-activation for the backward pass.
pub(crate) fn relu(x: &mut [f64]) {
    for v in x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// ReLU backward: zero where the pre-activation was non-positive.
pub(crate) fn relu_backward(grad: &mut [f64], pre: &[f64]) {
    for (g, &p) in grad.iter_mut().zip(pre.iter()) {
        if p <= 0.0 {
            *g = 0.0;
        }
    }
}

/// 2x2 max pooling; returns pooled values and flat argmax indices.
pub(crate) fn maxpool2(input: &[f64], ch: usize, h: usize, w: usize) -> (Vec<f64>, Vec<usize>) {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = vec![0.0; ch * oh * ow];
    let mut arg = vec![0usize; ch * oh * ow];
    for c in 0..ch {
        let plane = &input[c * h * w..(c + 1) * h * w];
        for y in 0..oh {
            for x in 0..ow {
                let base = (2 * y) * w + 2 * x;
                let ids = [base, base + 1, base + w, base + w + 1];
                let mut bi = ids[0];
                let mut bv = plane[ids[0]];
                for &i in &ids[1..] {
                    if plane[i] > bv {
                        bv = plane[i];
                        bi = i;
                    }
                }
                out[c * oh * ow + y * ow + x] = bv;
                arg[c * oh * ow + y * ow + x] = c * h * w + bi;
            }
        }
    }
    (out, arg)
}

pub(crate) fn maxpool2_backward(grad_out: &[f64], arg: &[usize], in_len: usize) -> Vec<f64> {
    let mut grad_in = vec![0.0; in_len];
    for (g, &i) in grad_out.iter().zip(arg.iter()) {
        grad_in[i] += g;
    }
    grad_in
}

/// Global average pool over each channel plane.
pub(crate) fn gap(input: &[f64], ch: usize, hw: usize) -> Vec<f64> {
    (0..ch)
        .map(|c| {
            let plane = &input[c * hw..(c + 1) * hw];
            let mut s = 0.0;
            for v in plane {
                s += v;
            }
            s / hw as f64
        })
        .collect()
}

pub(crate) fn gap_backward(grad_out: &[f64], ch: usize, hw: usize) -> Vec<f64> {
    let mut grad_in = vec![0.0; ch * hw];
    for c in 0..ch {
        let g = grad_out[c] / hw as f64;
        for v in &mut grad_in[c * hw..(c + 1) * hw] {
            *v = g;
        }
    }
    grad_in
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_identity_kernel_passes_input_through() {
        let mut conv = Conv2d::zeros(1, 1);
        conv.weight[4] = 1.0; // center tap
        let input: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let out = conv.forward(&input, 4, 4);
        assert_eq!(out, input);
    }

    #[test]
    fn conv_shift_kernel_shifts_rows() {
        let mut conv = Conv2d::zeros(1, 1);
        conv.weight[3] = 1.0; // (ky=1, kx=0): reads the pixel to the left
        let input: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let out = conv.forward(&input, 4, 4);
        // First column reads zero padding.
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], input[0]);
        assert_eq!(out[5], input[4]);
    }

    #[test]
    fn conv_backward_matches_finite_differences() {
        let mut rng = crate::rng::seeded(3);
        let conv = Conv2d::init(2, 3, &mut rng);
        let (h, w) = (5, 6);
        let input: Vec<f64> = (0..2 * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // Scalar objective: weighted sum of outputs.
        let coeff: Vec<f64> = (0..3 * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let loss = |c: &Conv2d, x: &[f64]| dot(&c.forward(x, h, w), &coeff);

        let mut gw = vec![0.0; conv.weight.len()];
        let mut gb = vec![0.0; conv.bias.len()];
        let gin = conv.backward(&input, &coeff, h, w, &mut gw, &mut gb);

        let eps = 1e-6;
        for i in [0usize, 7, 23, 40] {
            let mut xp = input.clone();
            let mut xm = input.clone();
            xp[i] += eps;
            xm[i] -= eps;
            let fd = (loss(&conv, &xp) - loss(&conv, &xm)) / (2.0 * eps);
            assert!((fd - gin[i]).abs() < 1e-7, "input grad {i}: {fd} vs {}", gin[i]);
        }
        for i in [0usize, 5, 17, 53] {
            let mut cp = conv.clone();
            let mut cm = conv.clone();
            cp.weight[i] += eps;
            cm.weight[i] -= eps;
            let fd = (loss(&cp, &input) - loss(&cm, &input)) / (2.0 * eps);
            assert!((fd - gw[i]).abs() < 1e-7, "weight grad {i}: {fd} vs {}", gw[i]);
        }
    }

    #[test]
    fn linear_backward_matches_finite_differences() {
        let mut rng = crate::rng::seeded(4);
        let layer = Linear::init(5, 3, &mut rng);
        let input: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let coeff: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let loss = |l: &Linear, x: &[f64]| dot(&l.forward(x), &coeff);

        let mut gw = vec![0.0; 15];
        let mut gb = vec![0.0; 3];
        let gin = layer.backward(&input, &coeff, &mut gw, &mut gb);
        let eps = 1e-6;
        for i in 0..5 {
            let mut xp = input.clone();
            let mut xm = input.clone();
            xp[i] += eps;
            xm[i] -= eps;
            let fd = (loss(&layer, &xp) - loss(&layer, &xm)) / (2.0 * eps);
            assert!((fd - gin[i]).abs() < 1e-8);
        }
        for i in 0..15 {
            let mut lp = layer.clone();
            let mut lm = layer.clone();
            lp.weight[i] += eps;
            lm.weight[i] -= eps;
            let fd = (loss(&lp, &input) - loss(&lm, &input)) / (2.0 * eps);
            assert!((fd - gw[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn maxpool_tracks_argmax() {
        let input = vec![1.0, 2.0, 3.0, 4.0]; // 2x2 single channel
        let (out, arg) = maxpool2(&input, 1, 2, 2);
        assert_eq!(out, vec![4.0]);
        assert_eq!(arg, vec![3]);
        let gin = maxpool2_backward(&[2.5], &arg, 4);
        assert_eq!(gin, vec![0.0, 0.0, 0.0, 2.5]);
    }

    #[test]
    fn gap_and_backward_are_uniform() {
        let input = vec![1.0, 2.0, 3.0, 4.0, 10.0, 10.0, 10.0, 10.0];
        let out = gap(&input, 2, 4);
        assert_eq!(out, vec![2.5, 10.0]);
        let gin = gap_backward(&[4.0, 8.0], 2, 4);
        assert!(gin[..4].iter().all(|&v| v == 1.0));
        assert!(gin[4..].iter().all(|&v| v == 2.0));
    }

    use rand::Rng as _;
}
