//! ROC sweep and the area under it, cross-checked against the rank
//! statistic so the trapezoid rule can never drift from the tie-aware
//! probabilistic reading of AUC.

use super::EvalError;
use crate::corpus::Label;
use serde::{Deserialize, Serialize};

/// One operating point. HIGH is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

/// Sweeps thresholds over the distinct scores in descending order,
/// classifying HIGH at score >= threshold. The curve starts at (0, 0)
/// under a sentinel threshold above every score and ends at (1, 1).
pub fn roc(scores: &[f64], labels: &[Label]) -> Result<Vec<RocPoint>, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: scores.len(),
            labels: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|l| **l == Label::High).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::DegenerateLabels);
    }
    debug_assert!(scores.iter().all(|s| s.is_finite()));

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b))
    });

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: scores[order[0]] + 1.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            match labels[order[i]] {
                Label::High => tp += 1,
                Label::Moderate => fp += 1,
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold,
        });
    }

    debug_assert!(
        (auc(&points) - rank_auc(scores, labels)).abs() <= 1e-12,
        "trapezoid {} disagrees with rank statistic {}",
        auc(&points),
        rank_auc(scores, labels)
    );
    Ok(points)
}

/// Trapezoid area under a swept curve.
pub fn auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

/// U / (n_pos * n_neg) with tied pairs counted one half, computed from
/// midranks.
fn rank_auc(scores: &[f64], labels: &[Label]) -> f64 {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut n_pos = 0usize;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; a tied block shares the average of its ranks.
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == Label::High {
                rank_sum_pos += midrank;
                n_pos += 1;
            }
        }
        i = j;
    }
    let n_neg = n - n_pos;
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    u / (n_pos * n_neg) as f64
}
