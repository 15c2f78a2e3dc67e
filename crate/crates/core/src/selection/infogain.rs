//! Information gain of the labels given an equal-frequency-binned column.

use super::discretize::discretize;
use crate::corpus::Label;

/// Shannon entropy in bits of a discrete distribution given by counts.
pub fn entropy_bits(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// IG = H(Y) - sum over bins of (n_bin/n) * H(Y | bin), base-2 entropy.
/// A constant column leaves the label entropy untouched and scores 0.
pub fn info_gain(column: &[f64], labels: &[Label], b: usize) -> f64 {
    assert_eq!(column.len(), labels.len());
    if labels.is_empty() {
        return 0.0;
    }
    let d = discretize(column, b);
    let label_counts = count_labels(labels);
    let h_y = entropy_bits(&label_counts);
    let n = labels.len() as f64;
    let mut per_bin = vec![[0usize; 2]; d.n_bins];
    for (bin, label) in d.bins.iter().zip(labels) {
        per_bin[*bin][class_index(label)] += 1;
    }
    let h_y_given_x: f64 = per_bin
        .iter()
        .map(|counts| {
            let n_bin: usize = counts.iter().sum();
            n_bin as f64 / n * entropy_bits(counts)
        })
        .sum();
    // Rounding can leave a hair below zero; gain is nonnegative by theory.
    (h_y - h_y_given_x).max(0.0)
}

fn class_index(label: &Label) -> usize {
    match label {
        Label::High => 0,
        Label::Moderate => 1,
    }
}

fn count_labels(labels: &[Label]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for l in labels {
        counts[class_index(l)] += 1;
    }
    counts
}
