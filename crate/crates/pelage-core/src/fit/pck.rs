//! Percentage of Correct Keypoints.

use alloc::format;
use nalgebra::Point2;

use crate::error::{CoreError, Result};

/// Share of ground-truth-visible keypoints whose prediction lies within
/// `fraction * max(bbox width, bbox height)` pixels of the ground truth.
pub fn pck(
    predicted: &[Point2<f64>],
    ground_truth: &[(Point2<f64>, bool)],
    bbox: [f64; 4],
    fraction: f64,
) -> Result<f64> {
    if predicted.len() != ground_truth.len() {
        return Err(CoreError::Dimension(format!(
            "{} predictions for {} ground-truth keypoints",
            predicted.len(),
            ground_truth.len()
        )));
    }
    let [x1, y1, x2, y2] = bbox;
    let threshold = fraction * (x2 - x1).max(y2 - y1);
    let mut visible = 0usize;
    let mut correct = 0usize;
    for (p, (g, vis)) in predicted.iter().zip(ground_truth.iter()) {
        if !vis {
            continue;
        }
        visible += 1;
        if (p - g).norm() <= threshold {
            correct += 1;
        }
    }
    if visible == 0 {
        return Err(CoreError::UndefinedMetric("no visible keypoints to score".into()));
    }
    Ok(correct as f64 / visible as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn perfect_prediction_scores_one() {
        let gt: Vec<(Point2<f64>, bool)> =
            vec![(Point2::new(10.0, 10.0), true), (Point2::new(50.0, 20.0), true)];
        let pred: Vec<Point2<f64>> = gt.iter().map(|(p, _)| *p).collect();
        assert_eq!(pck(&pred, &gt, [0.0, 0.0, 100.0, 50.0], 0.1).unwrap(), 1.0);
    }

    #[test]
    fn all_misses_score_zero() {
        let gt = vec![(Point2::new(10.0, 10.0), true), (Point2::new(50.0, 20.0), true)];
        let pred = vec![Point2::new(90.0, 40.0), Point2::new(0.0, 0.0)];
        assert_eq!(pck(&pred, &gt, [0.0, 0.0, 100.0, 50.0], 0.1).unwrap(), 0.0);
    }

    #[test]
    fn hand_counted_half() {
        // bbox 100x50 at fraction 0.1 -> threshold 10; errors {3, 9, 11, 20}.
        let gt = vec![
            (Point2::new(10.0, 10.0), true),
            (Point2::new(20.0, 10.0), true),
            (Point2::new(30.0, 10.0), true),
            (Point2::new(40.0, 10.0), true),
        ];
        let pred = vec![
            Point2::new(13.0, 10.0),
            Point2::new(29.0, 10.0),
            Point2::new(41.0, 10.0),
            Point2::new(60.0, 10.0),
        ];
        assert_eq!(pck(&pred, &gt, [0.0, 0.0, 100.0, 50.0], 0.1).unwrap(), 0.5);
    }

    #[test]
    fn exactly_on_threshold_counts() {
        let gt = vec![(Point2::new(10.0, 10.0), true)];
        let pred = vec![Point2::new(20.0, 10.0)];
        assert_eq!(pck(&pred, &gt, [0.0, 0.0, 100.0, 50.0], 0.1).unwrap(), 1.0);
    }

    #[test]
    fn invisible_keypoints_are_not_scored() {
        let gt = vec![(Point2::new(10.0, 10.0), false), (Point2::new(20.0, 10.0), true)];
        let pred = vec![Point2::new(99.0, 44.0), Point2::new(20.0, 10.0)];
        assert_eq!(pck(&pred, &gt, [0.0, 0.0, 100.0, 50.0], 0.1).unwrap(), 1.0);
    }

    #[test]
    fn zero_visible_is_undefined() {
        let gt = vec![(Point2::new(10.0, 10.0), false)];
        let pred = vec![Point2::new(10.0, 10.0)];
        assert!(matches!(
            pck(&pred, &gt, [0.0, 0.0, 100.0, 50.0], 0.1),
            Err(CoreError::UndefinedMetric(_))
        ));
    }
}
