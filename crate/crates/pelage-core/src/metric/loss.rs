//! Classification and triplet losses.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

/// Cross-entropy over logits in the log-sum-exp stabilized form.
pub fn softmax_loss(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(CoreError::Input(format!(
            "label {label} out of range for {} logits",
            logits.len()
        )));
    }
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for &l in logits {
        sum += libm::exp(l - m);
    }
    Ok(m + libm::log(sum) - logits[label])
}

/// Loss value plus the gradient w.r.t. the logits (`softmax - onehot`).
pub fn softmax_loss_grad(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    let loss = softmax_loss(logits, label)?;
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut grad = vec![0.0; logits.len()];
    let mut sum = 0.0;
    for (g, &l) in grad.iter_mut().zip(logits.iter()) {
        *g = libm::exp(l - m);
        sum += *g;
    }
    for g in &mut grad {
        *g /= sum;
    }
    grad[label] -= 1.0;
    Ok((loss, grad))
}

/// Reciprocal triplet loss `d_ap + 1/max(d_an, eps)`.
///
/// The epsilon clamp guards the pole at `d_an = 0` while leaving every
/// non-degenerate value exact.
pub fn rtl(d_ap: f64, d_an: f64, eps: f64) -> f64 {
    d_ap + 1.0 / d_an.max(eps)
}

/// RTL partial derivatives `(d/d d_ap, d/d d_an)`; zero slope inside the
/// clamped region.
pub fn rtl_grad(d_ap: f64, d_an: f64, eps: f64) -> (f64, f64) {
    let _ = d_ap;
    if d_an > eps {
        (1.0, -1.0 / (d_an * d_an))
    } else {
        (1.0, 0.0)
    }
}

/// Default pole guard.
pub const RTL_EPS: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_cost_ln_c() {
        for c in [2usize, 5, 37] {
            let logits = vec![0.7; c];
            let loss = softmax_loss(&logits, 0).unwrap();
            assert!((loss - libm::log(c as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_class_hand_value() {
        // logits [1,0], label 0 -> ln(1 + e^{-1}).
        let loss = softmax_loss(&[1.0, 0.0], 0).unwrap();
        assert!((loss - libm::log(1.0 + libm::exp(-1.0))).abs() < 1e-12);
        assert!((loss - 0.31326).abs() < 1e-5);
    }

    #[test]
    fn shift_invariance() {
        let a = softmax_loss(&[0.3, -1.2, 2.0], 2).unwrap();
        let b = softmax_loss(&[100.3, 98.8, 102.0], 2).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn label_out_of_range_is_an_error() {
        assert!(softmax_loss(&[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn loss_is_nonnegative() {
        let mut r = crate::rng::seeded(5);
        use rand::Rng as _;
        for _ in 0..200 {
            let c = r.gen_range(2..10);
            let logits: Vec<f64> = (0..c).map(|_| r.gen_range(-5.0..5.0)).collect();
            let label = r.gen_range(0..c);
            assert!(softmax_loss(&logits, label).unwrap() >= 0.0);
        }
    }

    #[test]
    fn softmax_grad_matches_finite_differences() {
        let logits = [0.3, -0.8, 1.4, 0.0];
        let (_, grad) = softmax_loss_grad(&logits, 1).unwrap();
        let h = 1e-6;
        for i in 0..4 {
            let mut lp = logits;
            let mut lm = logits;
            lp[i] += h;
            lm[i] -= h;
            let fd = (softmax_loss(&lp, 1).unwrap() - softmax_loss(&lm, 1).unwrap()) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn rtl_hand_values() {
        assert!((rtl(0.0, 1.0, RTL_EPS) - 1.0).abs() < 1e-6);
        assert!((rtl(2.0, 0.5, RTL_EPS) - 4.0).abs() < 1e-6);
        let pole = rtl(2.0, 0.0, RTL_EPS);
        assert!((pole - (2.0 + 1.0 / RTL_EPS)).abs() < 1e-6);
        assert!(pole.is_finite());
    }

    #[test]
    fn rtl_is_nonnegative() {
        let mut r = crate::rng::seeded(6);
        use rand::Rng as _;
        for _ in 0..200 {
            let d_ap = r.gen_range(0.0..10.0);
            let d_an = r.gen_range(0.0..10.0);
            assert!(rtl(d_ap, d_an, RTL_EPS) >= 0.0);
        }
    }
}
