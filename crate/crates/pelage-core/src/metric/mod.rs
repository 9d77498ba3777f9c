//! Metric learning: a small convolutional embedding network trained with
//! SoftMax + reciprocal triplet loss and batch-hard mining. The reverse-mode
//! gradients are hand-built and verified against finite differences.

mod gradcheck;
mod layers;
mod loss;
mod mining;
mod net;
mod train;

pub use gradcheck::{grad_check, GradCheckOptions};
pub use layers::{Conv2d, Linear};
pub use loss::{rtl, softmax_loss, softmax_loss_grad};
pub use mining::{batch_hard, Triplet};
pub use net::{input_from_chip, EmbeddingNet, Gradients, EMBED_DIM, INPUT_CHANNELS, INPUT_SIZE};
pub use train::{train, ChipSample, LossRecord, TrainConfig};
