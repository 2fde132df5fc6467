//! Binary classification metrics: confusion counts, accuracy/precision/
//! recall/F1, ROC-AUC, and wall-clock timing. Anomaly is the positive class.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("predicted has {predicted} labels but truth has {truth}")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("ROC-AUC needs at least one positive and one negative label")]
    SingleClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }
}

/// Accuracy, precision, recall, and F1 from confusion counts; 0/0 ratios
/// are defined as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Full per-run metric report as emitted in run records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    /// Wall-clock seconds around detection only, excluding I/O and
    /// reduction.
    pub computation_time_s: f64,
}

pub fn confusion(predicted: &[bool], truth: &[bool]) -> Result<ConfusionCounts, EvalError> {
    if predicted.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    let mut counts = ConfusionCounts {
        true_positive: 0,
        false_positive: 0,
        true_negative: 0,
        false_negative: 0,
    };
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => counts.true_positive += 1,
            (true, false) => counts.false_positive += 1,
            (false, false) => counts.true_negative += 1,
            (false, true) => counts.false_negative += 1,
        }
    }
    Ok(counts)
}

pub fn metrics(counts: &ConfusionCounts) -> ClassificationMetrics {
    let tp = counts.true_positive as f64;
    let fp = counts.false_positive as f64;
    let tn = counts.true_negative as f64;
    let fn_ = counts.false_negative as f64;
    let total = tp + fp + tn + fn_;
    let accuracy = if total > 0.0 { (tp + tn) / total } else { 0.0 };
    let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassificationMetrics {
        accuracy,
        precision,
        recall,
        f1,
    }
}

/// ROC-AUC as the Mann-Whitney statistic: the probability that a random
/// positive outscores a random negative, ties counted half. Computed through
/// average ranks, which is exactly the pairwise statistic.
pub fn roc_auc(scores: &[f64], truth: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            predicted: scores.len(),
            truth: truth.len(),
        });
    }
    let positives = truth.iter().filter(|&&t| t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Average ranks across tied scores keep the half-credit convention.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if truth[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }

    let p = positives as f64;
    let n = negatives as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * n))
}

/// Exhaustive positive-negative pair counting; the independent oracle for
/// [`roc_auc`].
pub fn roc_auc_pair_oracle(scores: &[f64], truth: &[bool]) -> Result<f64, EvalError> {
    let positives: Vec<f64> = scores
        .iter()
        .zip(truth)
        .filter(|(_, &t)| t)
        .map(|(&s, _)| s)
        .collect();
    let negatives: Vec<f64> = scores
        .iter()
        .zip(truth)
        .filter(|(_, &t)| !t)
        .map(|(&s, _)| s)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(EvalError::SingleClass);
    }
    let mut wins = 0.0;
    for &p in &positives {
        for &n in &negatives {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (positives.len() as f64 * negatives.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        let c = confusion(&[true, false], &[true, false]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                true_positive: 1,
                false_positive: 0,
                true_negative: 1,
                false_negative: 0
            }
        );

        let c = confusion(&[true, true], &[false, false]).unwrap();
        assert_eq!(c.false_positive, 2);

        let c = confusion(&[true, false, true, false], &[true, true, false, false]).unwrap();
        assert_eq!(c.true_positive, 1);
        assert_eq!(c.false_negative, 1);
        assert_eq!(c.false_positive, 1);
        assert_eq!(c.true_negative, 1);

        assert!(matches!(
            confusion(&[true], &[true, false]),
            Err(EvalError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn metric_examples() {
        let m = metrics(&ConfusionCounts {
            true_positive: 1,
            false_positive: 0,
            true_negative: 1,
            false_negative: 0,
        });
        assert_eq!(
            (m.accuracy, m.precision, m.recall, m.f1),
            (1.0, 1.0, 1.0, 1.0)
        );

        // Degenerate 0/0 ratios collapse to zero.
        let m = metrics(&ConfusionCounts {
            true_positive: 0,
            false_positive: 0,
            true_negative: 5,
            false_negative: 5,
        });
        assert_eq!(
            (m.precision, m.recall, m.f1, m.accuracy),
            (0.0, 0.0, 0.0, 0.5)
        );

        let m = metrics(&ConfusionCounts {
            true_positive: 1,
            false_positive: 1,
            true_negative: 1,
            false_negative: 1,
        });
        assert_eq!(
            (m.accuracy, m.precision, m.recall, m.f1),
            (0.5, 0.5, 0.5, 0.5)
        );
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
        assert_eq!(
            roc_auc(&[0.5, 0.5, 0.5, 0.5], &[true, false, true, false]).unwrap(),
            0.5
        );
        // Four pairs: three wins, one loss.
        assert_eq!(
            roc_auc(&[0.8, 0.6, 0.4, 0.2], &[true, false, true, false]).unwrap(),
            0.75
        );
        assert!(matches!(
            roc_auc(&[0.2, 0.4], &[true, true]),
            Err(EvalError::SingleClass)
        ));
    }

    #[test]
    fn auc_matches_pair_oracle_and_transform_invariance() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let n = 5 + (next() * 40.0) as usize;
            let scores: Vec<f64> = (0..n).map(|_| (next() * 8.0).round() / 8.0).collect();
            let truth: Vec<bool> = (0..n).map(|_| next() > 0.6).collect();
            if truth.iter().all(|&t| t) || truth.iter().all(|&t| !t) {
                continue;
            }
            let auc = roc_auc(&scores, &truth).unwrap();
            let oracle = roc_auc_pair_oracle(&scores, &truth).unwrap();
            assert!((auc - oracle).abs() <= 1e-12);

            // Invariance under a strictly increasing transform.
            let warped: Vec<f64> = scores.iter().map(|&s| (3.0 * s).exp() + 2.0).collect();
            let auc_warped = roc_auc(&warped, &truth).unwrap();
            assert!((auc - auc_warped).abs() <= 1e-12);

            // Negation flips the statistic when there are no ties.
            let jittered: Vec<f64> = scores
                .iter()
                .enumerate()
                .map(|(i, &s)| s + i as f64 * 1e-9)
                .collect();
            let auc_j = roc_auc(&jittered, &truth).unwrap();
            let negated: Vec<f64> = jittered.iter().map(|&s| -s).collect();
            let auc_neg = roc_auc(&negated, &truth).unwrap();
            assert!((auc_j + auc_neg - 1.0).abs() <= 1e-12);
        }
    }
}
