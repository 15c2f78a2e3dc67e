//! ReliefF instance-based feature weighting: k nearest hits and misses under
//! Manhattan distance on min-max normalized features.

use super::SelectionError;
use crate::corpus::Label;
use crate::par;
use crate::rng;
use rand::seq::SliceRandom;

/// Weight per feature in [-1, 1]. Every instance is visited once, in an
/// order drawn from `seed`; contributions are summed in that order, so the
/// result does not depend on thread count.
pub fn relieff(
    rows: &[Vec<f64>],
    labels: &[Label],
    k: usize,
    seed: u64,
) -> Result<Vec<f64>, SelectionError> {
    assert_eq!(rows.len(), labels.len());
    assert!(k >= 1, "need at least one neighbor");
    let n = rows.len();
    let n_high = labels.iter().filter(|l| **l == Label::High).count();
    if n_high == 0 || n_high == n {
        return Err(SelectionError::SingleClass);
    }
    let p = rows.first().map_or(0, Vec::len);
    let normalized = min_max_normalize(rows, p);

    let prior = |label: Label| -> f64 {
        let count = if label == Label::High { n_high } else { n - n_high };
        count as f64 / n as f64
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));

    let contributions = par::map_slice(&order, |&i| {
        let mut delta = vec![0.0f64; p];
        let own = labels[i];
        for &class in &[Label::High, Label::Moderate] {
            let mut candidates: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i && labels[j] == class)
                .map(|j| (manhattan(&normalized[i], &normalized[j]), j))
                .collect();
            if candidates.is_empty() {
                continue;
            }
            candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            candidates.truncate(k);
            // Miss contributions are scaled so all misses plus the hit term
            // stay balanced: sum over other classes of P(c)/(1-P(own)) is 1.
            let scale = if class == own {
                -1.0
            } else {
                prior(class) / (1.0 - prior(own))
            };
            let share = scale / candidates.len() as f64;
            for &(_, j) in &candidates {
                for f in 0..p {
                    delta[f] += share * (normalized[i][f] - normalized[j][f]).abs();
                }
            }
        }
        delta
    });

    let mut weights = vec![0.0f64; p];
    for delta in &contributions {
        for f in 0..p {
            weights[f] += delta[f] / n as f64;
        }
    }
    Ok(weights)
}

fn min_max_normalize(rows: &[Vec<f64>], p: usize) -> Vec<Vec<f64>> {
    let mut lo = vec![f64::INFINITY; p];
    let mut hi = vec![f64::NEG_INFINITY; p];
    for row in rows {
        for f in 0..p {
            lo[f] = lo[f].min(row[f]);
            hi[f] = hi[f].max(row[f]);
        }
    }
    rows.iter()
        .map(|row| {
            (0..p)
                .map(|f| {
                    if hi[f] > lo[f] {
                        (row[f] - lo[f]) / (hi[f] - lo[f])
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
