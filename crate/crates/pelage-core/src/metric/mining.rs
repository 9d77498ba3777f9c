//! Batch-hard triplet mining.

use alloc::vec::Vec;

use crate::error::{CoreError, Result};

/// Indices of one mined triplet within a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

/// Euclidean distance between two embeddings.
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        s += (x - y) * (x - y);
    }
    s.sqrt()
}

/// For every anchor with at least one same-label partner: the farthest
/// positive and the nearest negative, ties broken by the lowest index.
/// Anchors without a positive are skipped; a batch yielding no triplet at
/// all (e.g. a single identity) is an error.
pub fn batch_hard(embeddings: &[Vec<f64>], labels: &[usize]) -> Result<Vec<Triplet>> {
    if embeddings.len() != labels.len() {
        return Err(CoreError::Dimension(format!(
            "{} embeddings for {} labels",
            embeddings.len(),
            labels.len()
        )));
    }
    let n = embeddings.len();
    let mut out = Vec::new();
    for a in 0..n {
        let mut hardest_p: Option<(usize, f64)> = None;
        let mut hardest_n: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == a {
                continue;
            }
            let d = euclidean(&embeddings[a], &embeddings[j]);
            if labels[j] == labels[a] {
                let better = match hardest_p {
                    None => true,
                    Some((_, best)) => d > best,
                };
                if better {
                    hardest_p = Some((j, d));
                }
            } else {
                let better = match hardest_n {
                    None => true,
                    Some((_, best)) => d < best,
                };
                if better {
                    hardest_n = Some((j, d));
                }
            }
        }
        if let (Some((p, _)), Some((neg, _))) = (hardest_p, hardest_n) {
            out.push(Triplet { anchor: a, positive: p, negative: neg });
        }
    }
    if out.is_empty() {
        return Err(CoreError::NoTriplet(
            "batch needs two identities and a repeated identity".into(),
        ));
    }
    Ok(out)
}

use alloc::format;
