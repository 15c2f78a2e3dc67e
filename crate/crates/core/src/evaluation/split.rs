//! Stratified data partitions and the bootstrap resampler.

use super::EvalError;
use crate::corpus::Label;
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A train/test partition of document indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub ratio: f64,
    pub seed: u64,
    /// Only one class was present; the split stands but stratification
    /// degenerates.
    pub single_class: bool,
}

/// Index sets for k-fold cross-validation. Folds are disjoint and cover
/// every index; each fold's class counts sit within one of perfect
/// stratification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Train/test index pair where fold `fold` is held out.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        for (f, indices) in self.folds.iter().enumerate() {
            if f != fold {
                train.extend_from_slice(indices);
            }
        }
        train.sort_unstable();
        (train, self.folds[fold].clone())
    }
}

fn class_indices(labels: &[Label]) -> [Vec<usize>; 2] {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, label) in labels.iter().enumerate() {
        by_class[label.index()].push(i);
    }
    by_class
}

/// Splits indices into train and test, shuffling within each class and
/// allocating per class by largest remainder. With an 0.8 ratio, three
/// members of a class go two to train, one to test. A tie between the two
/// remainders goes to train.
pub fn stratified_holdout(labels: &[Label], ratio: f64, seed: u64) -> Result<SplitPlan, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(EvalError::InvalidRatio(ratio));
    }
    let mut rng = rng::seeded(seed);
    let by_class = class_indices(labels);
    let single_class = by_class.iter().any(|c| c.is_empty());
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut indices in by_class {
        indices.shuffle(&mut rng);
        let n_c = indices.len();
        let exact_train = ratio * n_c as f64;
        let mut t = exact_train.floor() as usize;
        let floor_test = ((1.0 - ratio) * n_c as f64).floor() as usize;
        if n_c - t - floor_test == 1 && exact_train - t as f64 >= 0.5 {
            t += 1;
        }
        train.extend_from_slice(&indices[..t]);
        test.extend_from_slice(&indices[t..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { train, test, ratio, seed, single_class })
}

/// Deals each class's shuffled indices round-robin across k folds.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::KTooSmall(k));
    }
    if k > labels.len() {
        return Err(EvalError::KTooLarge { k, n: labels.len() });
    }
    let mut rng = rng::seeded(seed);
    let mut folds = vec![Vec::new(); k];
    // The dealing cursor runs on across classes so no fold starves when
    // k exceeds a class count.
    let mut cursor = 0usize;
    for mut indices in class_indices(labels) {
        indices.shuffle(&mut rng);
        for idx in indices {
            folds[cursor % k].push(idx);
            cursor += 1;
        }
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    Ok(FoldPlan { folds, seed })
}

/// n uniform draws with replacement from 0..n. Deterministic per seed;
/// distinct coverage converges on 1 - 1/e for large n.
pub fn bootstrap_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::seeded(seed);
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(high: usize, moderate: usize) -> Vec<Label> {
        let mut v = vec![Label::High; high];
        v.extend(vec![Label::Moderate; moderate]);
        v
    }

    fn class_counts(indices: &[usize], labels: &[Label]) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &i in indices {
            counts[labels[i].index()] += 1;
        }
        counts
    }

    fn assert_partition(train: &[usize], test: &[usize], n: usize) {
        let mut all: Vec<usize> = train.iter().chain(test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn holdout_balanced_200_gives_80_20_per_class() {
        let ls = labels(100, 100);
        let plan = stratified_holdout(&ls, 0.8, 7).unwrap();
        assert_eq!(class_counts(&plan.train, &ls), [80, 80]);
        assert_eq!(class_counts(&plan.test, &ls), [20, 20]);
        assert_partition(&plan.train, &plan.test, 200);
        assert!(!plan.single_class);
    }

    #[test]
    fn holdout_three_per_class_puts_two_in_train() {
        let ls = labels(3, 3);
        let plan = stratified_holdout(&ls, 0.8, 11).unwrap();
        assert_eq!(class_counts(&plan.train, &ls), [2, 2]);
        assert_eq!(class_counts(&plan.test, &ls), [1, 1]);
    }

    #[test]
    fn holdout_train_share_within_one_of_ratio() {
        for (h, m) in [(7, 13), (1, 1), (50, 3), (9, 9), (2, 98)] {
            let ls = labels(h, m);
            let plan = stratified_holdout(&ls, 0.8, 3).unwrap();
            assert_partition(&plan.train, &plan.test, h + m);
            let train_c = class_counts(&plan.train, &ls);
            for (c, n_c) in [(0usize, h), (1, m)] {
                let exact = 0.8 * n_c as f64;
                assert!(
                    (train_c[c] as f64 - exact).abs() < 1.0,
                    "class {c}: {} train of {n_c}",
                    train_c[c]
                );
            }
        }
    }

    #[test]
    fn holdout_is_deterministic_and_seed_sensitive() {
        let ls = labels(30, 30);
        let a = stratified_holdout(&ls, 0.8, 5).unwrap();
        let b = stratified_holdout(&ls, 0.8, 5).unwrap();
        assert_eq!(a, b);
        let c = stratified_holdout(&ls, 0.8, 6).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn holdout_single_class_warns_but_splits() {
        let ls = labels(10, 0);
        let plan = stratified_holdout(&ls, 0.8, 2).unwrap();
        assert!(plan.single_class);
        assert_eq!(plan.train.len(), 8);
        assert_eq!(plan.test.len(), 2);
        assert_partition(&plan.train, &plan.test, 10);
    }

    #[test]
    fn holdout_rejects_bad_inputs() {
        assert_eq!(stratified_holdout(&[], 0.8, 1), Err(EvalError::Empty));
        let ls = labels(2, 2);
        assert_eq!(
            stratified_holdout(&ls, 1.0, 1),
            Err(EvalError::InvalidRatio(1.0))
        );
        assert_eq!(
            stratified_holdout(&ls, 0.0, 1),
            Err(EvalError::InvalidRatio(0.0))
        );
    }

    #[test]
    fn kfold_balanced_200_k10_gives_ten_plus_ten() {
        let ls = labels(100, 100);
        let plan = stratified_kfold(&ls, 10, 7).unwrap();
        assert_eq!(plan.k(), 10);
        for fold in &plan.folds {
            assert_eq!(class_counts(fold, &ls), [10, 10]);
        }
        let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..200).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_11_9_k2_stays_within_one_of_perfect() {
        let ls = labels(11, 9);
        let plan = stratified_kfold(&ls, 2, 1).unwrap();
        for fold in &plan.folds {
            let counts = class_counts(fold, &ls);
            assert!((counts[0] as f64 - 5.5).abs() <= 0.5);
            assert!((counts[1] as f64 - 4.5).abs() <= 0.5);
        }
    }

    #[test]
    fn kfold_leave_one_out_is_valid() {
        let ls = labels(3, 3);
        let plan = stratified_kfold(&ls, 6, 9).unwrap();
        for fold in &plan.folds {
            assert_eq!(fold.len(), 1);
        }
    }

    #[test]
    fn kfold_rejects_out_of_range_k() {
        let ls = labels(3, 3);
        assert_eq!(stratified_kfold(&ls, 1, 1), Err(EvalError::KTooSmall(1)));
        assert_eq!(
            stratified_kfold(&ls, 7, 1),
            Err(EvalError::KTooLarge { k: 7, n: 6 })
        );
    }

    #[test]
    fn kfold_split_returns_complement() {
        let ls = labels(8, 8);
        let plan = stratified_kfold(&ls, 4, 3).unwrap();
        for f in 0..4 {
            let (train, test) = plan.split(f);
            assert_eq!(test, plan.folds[f]);
            assert_partition(&train, &test, 16);
        }
    }

    #[test]
    fn kfold_same_seed_reproduces() {
        let ls = labels(17, 23);
        assert_eq!(
            stratified_kfold(&ls, 5, 42).unwrap(),
            stratified_kfold(&ls, 5, 42).unwrap()
        );
    }

    #[test]
    fn bootstrap_single_item_draws_it() {
        assert_eq!(bootstrap_indices(1, 99), vec![0]);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        assert_eq!(bootstrap_indices(50, 4), bootstrap_indices(50, 4));
        assert_ne!(bootstrap_indices(50, 4), bootstrap_indices(50, 5));
    }

    #[test]
    fn bootstrap_distinct_fraction_near_632() {
        let mut total = 0.0;
        for seed in 0..20u64 {
            let draws = bootstrap_indices(1000, seed);
            let mut seen = vec![false; 1000];
            for d in draws {
                seen[d] = true;
            }
            total += seen.iter().filter(|&&s| s).count() as f64 / 1000.0;
        }
        let mean = total / 20.0;
        assert!((mean - 0.632).abs() < 0.02, "distinct fraction {mean}");
    }
}
