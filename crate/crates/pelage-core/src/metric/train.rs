//! SGD trainer: SoftMax + reciprocal triplet loss over batch-hard triplets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use rand::seq::SliceRandom as _;
use rand::Rng as _;

use crate::error::{CoreError, Result};
use crate::rng;

use super::loss::{rtl, rtl_grad, softmax_loss_grad, RTL_EPS};
use super::mining::{batch_hard, euclidean};
use super::net::{EmbeddingNet, EMBED_DIM};

/// Training hyperparameters. Defaults follow the study recipe: 200 epochs,
/// batch 8 composed as 4 identities x 2 samples, plain SGD at 0.1, RTL
/// coefficient 1e-4.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rtl_lambda: f64,
    /// Identities per batch (P); samples per identity is `batch_size / P`.
    pub ids_per_batch: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 8,
            learning_rate: 0.1,
            rtl_lambda: 1e-4,
            ids_per_batch: 4,
            seed: 0,
        }
    }
}

/// One training sample: a prepared input tensor and its identity label.
#[derive(Debug, Clone)]
pub struct ChipSample {
    pub input: Vec<f64>,
    pub label: usize,
}

/// Per-step loss log entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LossRecord {
    pub epoch: usize,
    pub step: usize,
    pub softmax: f64,
    pub rtl: f64,
    pub total: f64,
}

/// Train an embedding network from scratch.
///
/// Deterministic: identical `(samples, classes, config)` produce bit-identical
/// weights and loss logs. Batches are sampled as P identities x K samples so
/// batch-hard mining always finds positives and negatives.
pub fn train(
    samples: &[ChipSample],
    classes: usize,
    config: &TrainConfig,
) -> Result<(EmbeddingNet, Vec<LossRecord>)> {
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        if s.label >= classes {
            return Err(CoreError::Dataset(format!(
                "label {} out of range for {classes} classes",
                s.label
            )));
        }
        by_label.entry(s.label).or_default().push(i);
    }
    let rich = by_label.values().filter(|v| v.len() >= 2).count();
    if by_label.len() < 2 || rich < 2 {
        return Err(CoreError::Dataset(format!(
            "need at least 2 identities with 2 chips each, have {} identities ({rich} with >= 2)",
            by_label.len()
        )));
    }
    // P: the largest divisor of the batch size that fits the identity count
    // and still leaves K >= 2 samples per identity.
    let p = {
        let cap = config.ids_per_batch.min(by_label.len()).min(config.batch_size / 2);
        (1..=cap).rev().find(|p| config.batch_size % p == 0).unwrap_or(1)
    };
    if p < 2 {
        return Err(CoreError::Dataset("batch composition needs at least 2 identities".into()));
    }
    let k = config.batch_size / p;
    let labels_list: Vec<usize> = by_label.keys().cloned().collect();

    let mut net = EmbeddingNet::init(classes, config.seed);
    let steps_per_epoch = samples.len().div_ceil(config.batch_size).max(1);
    let mut log = Vec::with_capacity(config.epochs * steps_per_epoch);

    for epoch in 0..config.epochs {
        for step in 0..steps_per_epoch {
            let mut r = rng::substream(config.seed, ((epoch as u64) << 24) | step as u64);
            // Choose P identities, then K chips per identity (with
            // replacement when the pool is smaller than K).
            let mut ids = labels_list.clone();
            ids.shuffle(&mut r);
            ids.truncate(p);
            let mut batch: Vec<usize> = Vec::with_capacity(config.batch_size);
            for &id in &ids {
                let pool = &by_label[&id];
                if pool.len() >= k {
                    let mut pool = pool.clone();
                    pool.shuffle(&mut r);
                    batch.extend_from_slice(&pool[..k]);
                } else {
                    for _ in 0..k {
                        batch.push(pool[r.gen_range(0..pool.len())]);
                    }
                }
            }

            let record = train_step(&mut net, samples, &batch, epoch, step, config)?;
            log.push(record);
        }
    }
    Ok((net, log))
}

fn train_step(
    net: &mut EmbeddingNet,
    samples: &[ChipSample],
    batch: &[usize],
    epoch: usize,
    step: usize,
    config: &TrainConfig,
) -> Result<LossRecord> {
    let b = batch.len();
    let mut caches = Vec::with_capacity(b);
    let mut embeddings: Vec<Vec<f64>> = Vec::with_capacity(b);
    let mut labels = Vec::with_capacity(b);
    for &i in batch {
        let cache = net.forward(&samples[i].input);
        embeddings.push(cache.embedding.clone());
        labels.push(samples[i].label);
        caches.push(cache);
    }

    let mut softmax_sum = 0.0;
    let mut dlogits: Vec<Vec<f64>> = Vec::with_capacity(b);
    for (cache, &label) in caches.iter().zip(labels.iter()) {
        let (loss, mut grad) = softmax_loss_grad(&cache.logits, label)?;
        softmax_sum += loss;
        for g in &mut grad {
            *g /= b as f64;
        }
        dlogits.push(grad);
    }
    let softmax_mean = softmax_sum / b as f64;

    let triplets = batch_hard(&embeddings, &labels)?;
    let t_count = triplets.len() as f64;
    let mut rtl_sum = 0.0;
    let mut dembed = alloc::vec![alloc::vec![0.0; EMBED_DIM]; b];
    if config.rtl_lambda != 0.0 {
        for t in &triplets {
            let d_ap = euclidean(&embeddings[t.anchor], &embeddings[t.positive]);
            let d_an = euclidean(&embeddings[t.anchor], &embeddings[t.negative]);
            rtl_sum += rtl(d_ap, d_an, RTL_EPS);
            let (g_ap, g_an) = rtl_grad(d_ap, d_an, RTL_EPS);
            let scale = config.rtl_lambda / t_count;
            // d d(a,x)/d e_a = (e_a - e_x) / d; zero direction at d = 0.
            if d_ap > 0.0 {
                for c in 0..EMBED_DIM {
                    let dir = (embeddings[t.anchor][c] - embeddings[t.positive][c]) / d_ap;
                    dembed[t.anchor][c] += scale * g_ap * dir;
                    dembed[t.positive][c] -= scale * g_ap * dir;
                }
            }
            if d_an > 0.0 {
                for c in 0..EMBED_DIM {
                    let dir = (embeddings[t.anchor][c] - embeddings[t.negative][c]) / d_an;
                    dembed[t.anchor][c] += scale * g_an * dir;
                    dembed[t.negative][c] -= scale * g_an * dir;
                }
            }
        }
    } else {
        for t in &triplets {
            let d_ap = euclidean(&embeddings[t.anchor], &embeddings[t.positive]);
            let d_an = euclidean(&embeddings[t.anchor], &embeddings[t.negative]);
            rtl_sum += rtl(d_ap, d_an, RTL_EPS);
        }
    }
    let rtl_mean = rtl_sum / t_count;

    let mut grads = net.zero_gradients();
    for (i, cache) in caches.iter().enumerate() {
        net.backward(cache, &dlogits[i], Some(&dembed[i]), &mut grads);
    }
    net.sgd_step(&grads, config.learning_rate);

    Ok(LossRecord {
        epoch,
        step,
        softmax: softmax_mean,
        rtl: rtl_mean,
        total: softmax_mean + config.rtl_lambda * rtl_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Small synthetic inputs: per-identity constant pattern plus noise.
    fn toy_dataset(ids: usize, per_id: usize, seed: u64) -> Vec<ChipSample> {
        use super::super::net::{INPUT_CHANNELS, INPUT_SIZE};
        let mut out = Vec::new();
        let n = INPUT_CHANNELS * INPUT_SIZE * INPUT_SIZE;
        for id in 0..ids {
            let mut base = rng::substream(seed, id as u64);
            let pattern: Vec<f64> = (0..n).map(|_| base.gen_range(-1.0..1.0)).collect();
            for s in 0..per_id {
                let mut noise = rng::substream(seed, ((id * 100 + s) as u64) | (1 << 40));
                let input: Vec<f64> =
                    pattern.iter().map(|&v| v + noise.gen_range(-0.05..0.05)).collect();
                out.push(ChipSample { input, label: id });
            }
        }
        out
    }

    #[test]
    fn training_is_deterministic() {
        let data = toy_dataset(3, 3, 1);
        let config = TrainConfig { epochs: 2, ..Default::default() };
        let (net_a, log_a) = train(&data, 3, &config).unwrap();
        let (net_b, log_b) = train(&data, 3, &config).unwrap();
        assert_eq!(log_a, log_b);
        assert_eq!(net_a, net_b);
    }

    #[test]
    fn zero_lambda_reduces_to_softmax() {
        let data = toy_dataset(3, 3, 2);
        let config = TrainConfig { epochs: 2, rtl_lambda: 0.0, ..Default::default() };
        let (_, log) = train(&data, 3, &config).unwrap();
        for rec in &log {
            assert!((rec.total - rec.softmax).abs() < 1e-9);
        }
    }

    #[test]
    fn loss_trends_down_on_separable_data() {
        let data = toy_dataset(4, 4, 3);
        let config = TrainConfig { epochs: 10, ..Default::default() };
        let (_, log) = train(&data, 4, &config).unwrap();
        let epoch_mean = |e: usize| {
            let recs: Vec<&LossRecord> = log.iter().filter(|r| r.epoch == e).collect();
            recs.iter().map(|r| r.total).sum::<f64>() / recs.len() as f64
        };
        assert!(
            epoch_mean(9) < epoch_mean(0),
            "epoch 9 loss {} should beat epoch 0 loss {}",
            epoch_mean(9),
            epoch_mean(0)
        );
    }

    #[test]
    fn single_identity_is_a_dataset_error() {
        let data = toy_dataset(1, 4, 4);
        let config = TrainConfig { epochs: 1, ..Default::default() };
        assert!(matches!(train(&data, 1, &config), Err(CoreError::Dataset(_))));
    }
}
