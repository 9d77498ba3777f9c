//! The embedding network: three conv blocks, global average pooling, a
//! 128-D embedding head and a classification head.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::rng;
use crate::texture::{normalize_chip, resample_chip, PatternChip};

use super::layers::{
    gap, gap_backward, maxpool2, maxpool2_backward, relu, relu_backward, Conv2d, Linear,
};

/// Identity-space dimension.
pub const EMBED_DIM: usize = 128;
/// Network input resolution (chips are resampled to this size).
pub const INPUT_SIZE: usize = 64;
/// RGB plus the validity mask.
pub const INPUT_CHANNELS: usize = 4;

const CH1: usize = 8;
const CH2: usize = 16;
const CH3: usize = 32;

/// Convolutional embedding network.
///
/// `input [4,64,64] -> conv/relu/pool x3 (8,16,32 channels) -> GAP ->
/// linear -> 128-D embedding -> linear head -> C logits`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingNet {
    pub conv1: Conv2d,
    pub conv2: Conv2d,
    pub conv3: Conv2d,
    pub fc_embed: Linear,
    pub fc_head: Linear,
}

/// Per-array gradients, same shapes as the corresponding weights.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub conv1_w: Vec<f64>,
    pub conv1_b: Vec<f64>,
    pub conv2_w: Vec<f64>,
    pub conv2_b: Vec<f64>,
    pub conv3_w: Vec<f64>,
    pub conv3_b: Vec<f64>,
    pub fc_embed_w: Vec<f64>,
    pub fc_embed_b: Vec<f64>,
    pub fc_head_w: Vec<f64>,
    pub fc_head_b: Vec<f64>,
}

/// Intermediate activations kept for the backward pass.
pub struct ForwardCache {
    input: Vec<f64>,
    pre1: Vec<f64>,
    post1: Vec<f64>,
    arg1: Vec<usize>,
    pre2: Vec<f64>,
    post2: Vec<f64>,
    arg2: Vec<usize>,
    pre3: Vec<f64>,
    post3: Vec<f64>,
    arg3: Vec<usize>,
    pooled: Vec<f64>,
    pub embedding: Vec<f64>,
    pub logits: Vec<f64>,
}

impl ForwardCache {
    /// Signs of all ReLU pre-activations; used by the gradient checker to
    /// detect kink crossings.
    pub fn relu_pattern(&self) -> Vec<bool> {
        self.pre1
            .iter()
            .chain(self.pre2.iter())
            .chain(self.pre3.iter())
            .map(|&v| v > 0.0)
            .collect()
    }
}

impl EmbeddingNet {
    /// Seeded fan-in-uniform initialization with `classes` output logits.
    pub fn init(classes: usize, seed: u64) -> Self {
        let mut r = rng::substream(seed, 0xEE);
        Self {
            conv1: Conv2d::init(INPUT_CHANNELS, CH1, &mut r),
            conv2: Conv2d::init(CH1, CH2, &mut r),
            conv3: Conv2d::init(CH2, CH3, &mut r),
            fc_embed: Linear::init(CH3, EMBED_DIM, &mut r),
            fc_head: Linear::init(EMBED_DIM, classes, &mut r),
        }
    }

    pub fn classes(&self) -> usize {
        self.fc_head.out_dim
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            conv1_w: vec![0.0; self.conv1.weight.len()],
            conv1_b: vec![0.0; self.conv1.bias.len()],
            conv2_w: vec![0.0; self.conv2.weight.len()],
            conv2_b: vec![0.0; self.conv2.bias.len()],
            conv3_w: vec![0.0; self.conv3.weight.len()],
            conv3_b: vec![0.0; self.conv3.bias.len()],
            fc_embed_w: vec![0.0; self.fc_embed.weight.len()],
            fc_embed_b: vec![0.0; self.fc_embed.bias.len()],
            fc_head_w: vec![0.0; self.fc_head.weight.len()],
            fc_head_b: vec![0.0; self.fc_head.bias.len()],
        }
    }

    /// Full forward pass keeping intermediates for backprop.
    pub fn forward(&self, input: &[f64]) -> ForwardCache {
        let s = INPUT_SIZE;
        debug_assert_eq!(input.len(), INPUT_CHANNELS * s * s);
        let pre1 = self.conv1.forward(input, s, s);
        let mut act1 = pre1.clone();
        relu(&mut act1);
        let (post1, arg1) = maxpool2(&act1, CH1, s, s);
        let s2 = s / 2;
        let pre2 = self.conv2.forward(&post1, s2, s2);
        let mut act2 = pre2.clone();
        relu(&mut act2);
        let (post2, arg2) = maxpool2(&act2, CH2, s2, s2);
        let s3 = s2 / 2;
        let pre3 = self.conv3.forward(&post2, s3, s3);
        let mut act3 = pre3.clone();
        relu(&mut act3);
        let (post3, arg3) = maxpool2(&act3, CH3, s3, s3);
        let s4 = s3 / 2;
        let pooled = gap(&post3, CH3, s4 * s4);
        let embedding = self.fc_embed.forward(&pooled);
        let logits = self.fc_head.forward(&embedding);
        ForwardCache {
            input: input.to_vec(),
            pre1,
            post1,
            arg1,
            pre2,
            post2,
            arg2,
            pre3,
            post3,
            arg3,
            pooled,
            embedding,
            logits,
        }
    }

    /// Reverse pass from gradients on the logits and (optionally) directly on
    /// the embedding (triplet terms). Accumulates into `grads`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_logits: &[f64],
        grad_embedding_extra: Option<&[f64]>,
        grads: &mut Gradients,
    ) {
        let s = INPUT_SIZE;
        let (s2, s3, s4) = (s / 2, s / 4, s / 8);
        let mut grad_embed =
            self.fc_head
                .backward(&cache.embedding, grad_logits, &mut grads.fc_head_w, &mut grads.fc_head_b);
        if let Some(extra) = grad_embedding_extra {
            for (g, e) in grad_embed.iter_mut().zip(extra.iter()) {
                *g += e;
            }
        }
        let grad_pooled =
            self.fc_embed
                .backward(&cache.pooled, &grad_embed, &mut grads.fc_embed_w, &mut grads.fc_embed_b);
        let grad_post3 = gap_backward(&grad_pooled, CH3, s4 * s4);
        let mut grad_relu3 = maxpool2_backward(&grad_post3, &cache.arg3, CH3 * s3 * s3);
        relu_backward(&mut grad_relu3, &cache.pre3);
        let grad_post2 =
            self.conv3
                .backward(&cache.post2, &grad_relu3, s3, s3, &mut grads.conv3_w, &mut grads.conv3_b);
        let mut grad_relu2 = maxpool2_backward(&grad_post2, &cache.arg2, CH2 * s2 * s2);
        relu_backward(&mut grad_relu2, &cache.pre2);
        let grad_post1 =
            self.conv2
                .backward(&cache.post1, &grad_relu2, s2, s2, &mut grads.conv2_w, &mut grads.conv2_b);
        let mut grad_relu1 = maxpool2_backward(&grad_post1, &cache.arg1, CH1 * s * s);
        relu_backward(&mut grad_relu1, &cache.pre1);
        let _ = self.conv1.backward(
            &cache.input,
            &grad_relu1,
            s,
            s,
            &mut grads.conv1_w,
            &mut grads.conv1_b,
        );
    }

    /// SGD update: `w -= lr * g`.
    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64) {
        fn upd(w: &mut [f64], g: &[f64], lr: f64) {
            for (w, g) in w.iter_mut().zip(g.iter()) {
                *w -= lr * g;
            }
        }
        upd(&mut self.conv1.weight, &grads.conv1_w, lr);
        upd(&mut self.conv1.bias, &grads.conv1_b, lr);
        upd(&mut self.conv2.weight, &grads.conv2_w, lr);
        upd(&mut self.conv2.bias, &grads.conv2_b, lr);
        upd(&mut self.conv3.weight, &grads.conv3_w, lr);
        upd(&mut self.conv3.bias, &grads.conv3_b, lr);
        upd(&mut self.fc_embed.weight, &grads.fc_embed_w, lr);
        upd(&mut self.fc_embed.bias, &grads.fc_embed_b, lr);
        upd(&mut self.fc_head.weight, &grads.fc_head_w, lr);
        upd(&mut self.fc_head.bias, &grads.fc_head_b, lr);
    }

    /// Deterministic embedding of a pattern chip (no output normalization).
    pub fn embed(&self, chip: &PatternChip) -> Result<Vec<f64>> {
        let input = input_from_chip(chip)?;
        Ok(self.forward(&input).embedding)
    }

    /// Named weight arrays with shapes, for serialization.
    pub fn named_arrays(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        vec![
            ("conv1.weight", vec![CH1, INPUT_CHANNELS, 3, 3], self.conv1.weight.as_slice()),
            ("conv1.bias", vec![CH1], self.conv1.bias.as_slice()),
            ("conv2.weight", vec![CH2, CH1, 3, 3], self.conv2.weight.as_slice()),
            ("conv2.bias", vec![CH2], self.conv2.bias.as_slice()),
            ("conv3.weight", vec![CH3, CH2, 3, 3], self.conv3.weight.as_slice()),
            ("conv3.bias", vec![CH3], self.conv3.bias.as_slice()),
            ("fc_embed.weight", vec![EMBED_DIM, CH3], self.fc_embed.weight.as_slice()),
            ("fc_embed.bias", vec![EMBED_DIM], self.fc_embed.bias.as_slice()),
            ("fc_head.weight", vec![self.fc_head.out_dim, EMBED_DIM], self.fc_head.weight.as_slice()),
            ("fc_head.bias", vec![self.fc_head.out_dim], self.fc_head.bias.as_slice()),
        ]
    }

    /// Mutable access to a named weight array (for deserialization).
    pub fn array_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        match name {
            "conv1.weight" => Some(&mut self.conv1.weight),
            "conv1.bias" => Some(&mut self.conv1.bias),
            "conv2.weight" => Some(&mut self.conv2.weight),
            "conv2.bias" => Some(&mut self.conv2.bias),
            "conv3.weight" => Some(&mut self.conv3.weight),
            "conv3.bias" => Some(&mut self.conv3.bias),
            "fc_embed.weight" => Some(&mut self.fc_embed.weight),
            "fc_embed.bias" => Some(&mut self.fc_embed.bias),
            "fc_head.weight" => Some(&mut self.fc_head.weight),
            "fc_head.bias" => Some(&mut self.fc_head.bias),
            _ => None,
        }
    }
}

/// Network input tensor from a pattern chip: per-channel standardization,
/// bilinear resample to 64x64, validity coverage as the fourth channel.
pub fn input_from_chip(chip: &PatternChip) -> Result<Vec<f64>> {
    if chip.valid_count() == 0 {
        return Err(CoreError::Input("cannot embed an empty chip".into()));
    }
    let normalized = normalize_chip(chip)?;
    let r = resample_chip(&normalized, INPUT_SIZE, INPUT_SIZE);
    let n = INPUT_SIZE * INPUT_SIZE;
    let mut input = vec![0.0; INPUT_CHANNELS * n];
    for i in 0..n {
        for c in 0..3 {
            input[c * n + i] = r.pixels[i][c];
        }
        input[3 * n + i] = r.coverage[i];
    }
    Ok(input)
}
