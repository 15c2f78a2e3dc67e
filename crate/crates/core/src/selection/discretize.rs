//! Equal-frequency binning, the discrete front end for the chi-square and
//! information-gain scorers.

/// Bin assignment for one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discretized {
    /// Bin index per value, in input order.
    pub bins: Vec<usize>,
    /// Number of populated bins; always contiguous from 0.
    pub n_bins: usize,
    /// True when every value fell into a single bin.
    pub constant: bool,
}

/// Splits a column into `b` equal-frequency bins at empirical quantiles.
/// Cut points are data values, so identical values always share a bin and
/// heavy ties can leave fewer than `b` populated bins.
pub fn discretize(column: &[f64], b: usize) -> Discretized {
    assert!(b >= 2, "need at least two bins");
    let n = column.len();
    if n == 0 {
        return Discretized {
            bins: Vec::new(),
            n_bins: 0,
            constant: true,
        };
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite feature values"));
    // j-th cut sits at the ceil(j*n/b)-th smallest value.
    let mut cuts: Vec<f64> = (1..b).map(|j| sorted[(j * n).div_ceil(b) - 1]).collect();
    cuts.dedup();
    let bins: Vec<usize> = column
        .iter()
        .map(|x| cuts.iter().filter(|c| *c < x).count())
        .collect();
    // Cut values are themselves data points, so populated bins form a prefix.
    let n_bins = bins.iter().max().copied().unwrap_or(0) + 1;
    Discretized {
        bins,
        n_bins,
        constant: n_bins == 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_one_through_eight_into_quartiles() {
        let vals: Vec<f64> = (1..=8).map(f64::from).collect();
        let d = discretize(&vals, 4);
        assert_eq!(d.bins, vec![0, 0, 1, 1, 2, 2, 3, 3]);
        assert_eq!(d.n_bins, 4);
        assert!(!d.constant);
    }

    #[test]
    fn constant_column_collapses_to_one_flagged_bin() {
        let d = discretize(&[2.5; 6], 4);
        assert_eq!(d.bins, vec![0; 6]);
        assert_eq!(d.n_bins, 1);
        assert!(d.constant);
    }

    #[test]
    fn ties_share_a_bin() {
        let d = discretize(&[1.0, 1.0, 1.0, 2.0], 2);
        assert_eq!(d.bins, vec![0, 0, 0, 1]);
        assert_eq!(d.n_bins, 2);
    }

    #[test]
    fn heavy_ties_reduce_effective_bins() {
        // Three distinct values cannot fill four bins.
        let d = discretize(&[1.0, 1.0, 1.0, 2.0, 2.0, 3.0], 4);
        assert!(d.n_bins <= 3);
        assert_eq!(d.bins[0], d.bins[1]);
    }

    #[test]
    fn bin_order_follows_value_order() {
        let d = discretize(&[9.0, 1.0, 5.0, 3.0], 2);
        assert!(d.bins[1] <= d.bins[3]);
        assert!(d.bins[3] <= d.bins[2]);
        assert!(d.bins[2] <= d.bins[0]);
    }

    #[test]
    fn populated_bins_form_a_prefix() {
        for b in 2..=6 {
            let vals = [0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 5.0, 5.0, 5.0, 5.0, 7.0];
            let d = discretize(&vals, b);
            let mut seen = vec![false; d.n_bins];
            for &g in &d.bins {
                seen[g] = true;
            }
            assert!(seen.iter().all(|&s| s), "b={b}: gap in bins {:?}", d.bins);
        }
    }
}
