//! Recall-first threshold selection for the initial predictor.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Picks the lowest confidence threshold whose precision is at least
/// `min_precision`. Lower thresholds never lose recall, so this maximizes
/// recall under the precision floor.
///
/// `scored` holds `(confidence, label)` pairs; a session is predicted HIGH
/// when its confidence is at or above the threshold.
pub fn tune_threshold(scored: &[(f64, bool)], min_precision: f64) -> Result<ThresholdChoice> {
    let positives = scored.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == scored.len() {
        return Err(Error::SingleClass);
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best: Option<ThresholdChoice> = None;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        // ties share a threshold
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        if precision >= min_precision {
            best = Some(ThresholdChoice {
                threshold: t,
                precision,
                recall: tp as f64 / positives as f64,
            });
        }
    }
    best.ok_or(Error::PrecisionUnattainable(min_precision))
}
