//! Pearson chi-square of a binned feature column against the class labels.

use super::discretize::discretize;
use crate::corpus::Label;
use crate::stats::gamma_q;

/// Chi-square statistic and upper-tail p for a real column, binned into `b`
/// equal-frequency bins. A column that lands in one bin carries no signal
/// and returns (0, 1), as does a single-class label vector.
pub fn chi_square(column: &[f64], labels: &[Label], b: usize) -> (f64, f64) {
    assert_eq!(column.len(), labels.len());
    let d = discretize(column, b);
    if d.constant {
        return (0.0, 1.0);
    }
    let mut counts = vec![vec![0u64; 2]; d.n_bins];
    for (bin, label) in d.bins.iter().zip(labels) {
        let class = match label {
            Label::High => 0,
            Label::Moderate => 1,
        };
        counts[*bin][class] += 1;
    }
    chi_square_from_counts(&counts)
}

/// Chi-square on an explicit contingency table (rows: bins, cols: classes).
/// Empty rows and columns are dropped before computing expectations, so the
/// degrees of freedom reflect the populated table.
pub fn chi_square_from_counts(counts: &[Vec<u64>]) -> (f64, f64) {
    let n_cols = counts.first().map_or(0, Vec::len);
    let row_totals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<u64> = (0..n_cols)
        .map(|c| counts.iter().map(|r| r[c]).sum())
        .collect();
    let n: u64 = row_totals.iter().sum();
    let rows = row_totals.iter().filter(|&&t| t > 0).count();
    let cols = col_totals.iter().filter(|&&t| t > 0).count();
    if n == 0 || rows < 2 || cols < 2 {
        return (0.0, 1.0);
    }
    let mut stat = 0.0;
    for (r, row) in counts.iter().enumerate() {
        if row_totals[r] == 0 {
            continue;
        }
        for (c, &obs) in row.iter().enumerate() {
            if col_totals[c] == 0 {
                continue;
            }
            let expected = row_totals[r] as f64 * col_totals[c] as f64 / n as f64;
            let diff = obs as f64 - expected;
            stat += diff * diff / expected;
        }
    }
    let dof = (rows - 1) * (cols - 1);
    let p = gamma_q(dof as f64 / 2.0, stat / 2.0);
    (stat, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perfectly_separated_table() {
        let (stat, p) = chi_square_from_counts(&[vec![5, 0], vec![0, 5]]);
        assert_abs_diff_eq!(stat, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 0.001565402258002549, epsilon = 1e-9);
    }

    #[test]
    fn independent_table_scores_zero() {
        let (stat, p) = chi_square_from_counts(&[vec![5, 5], vec![5, 5]]);
        assert_eq!(stat, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn constant_feature_scores_zero() {
        let labels = [Label::High, Label::High, Label::Moderate, Label::Moderate];
        let (stat, p) = chi_square(&[3.0; 4], &labels, 4);
        assert_eq!((stat, p), (0.0, 1.0));
    }

    #[test]
    fn label_copy_separates_perfectly() {
        let labels: Vec<Label> = (0..10)
            .map(|i| if i < 5 { Label::High } else { Label::Moderate })
            .collect();
        let column: Vec<f64> = labels
            .iter()
            .map(|l| if *l == Label::High { 1.0 } else { 0.0 })
            .collect();
        let (stat, p) = chi_square(&column, &labels, 4);
        assert_abs_diff_eq!(stat, 10.0, epsilon = 1e-12);
        assert!(p < 0.01);
    }

    #[test]
    fn single_class_labels_return_unit_p() {
        let labels = [Label::High; 4];
        let (stat, p) = chi_square(&[1.0, 2.0, 3.0, 4.0], &labels, 2);
        assert_eq!((stat, p), (0.0, 1.0));
    }

    #[test]
    fn empty_rows_do_not_affect_dof() {
        let with_gap = chi_square_from_counts(&[vec![5, 0], vec![0, 0], vec![0, 5]]);
        let without = chi_square_from_counts(&[vec![5, 0], vec![0, 5]]);
        assert_eq!(with_gap, without);
    }

    #[test]
    fn matches_brute_force_on_random_tables() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(11);
        for _ in 0..200 {
            let rows = rng.gen_range(2..5);
            let table: Vec<Vec<u64>> = (0..rows)
                .map(|_| vec![rng.gen_range(1..20), rng.gen_range(1..20)])
                .collect();
            let (stat, _) = chi_square_from_counts(&table);
            // Independent recomputation straight from the definition.
            let n: u64 = table.iter().flatten().sum();
            let mut expect_stat = 0.0;
            for r in 0..rows {
                for c in 0..2 {
                    let rt: u64 = table[r].iter().sum();
                    let ct: u64 = table.iter().map(|row| row[c]).sum();
                    let e = rt as f64 * ct as f64 / n as f64;
                    expect_stat += (table[r][c] as f64 - e).powi(2) / e;
                }
            }
            assert_abs_diff_eq!(stat, expect_stat, epsilon = 1e-9);
        }
    }
}
