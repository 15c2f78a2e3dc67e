//! Grid search over model specs by cross-validated accuracy.

use super::{auc, bootstrap_indices, roc, stratified_kfold, EvalError, FoldPlan};
use crate::corpus::Label;
use crate::features::FeatureId;
use crate::learners::{AnyModel, ModelSpec};
use crate::{par, rng};
use serde::{Deserialize, Serialize};

/// Cross-validation record for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub spec: ModelSpec,
    pub fold_accuracy: Vec<f64>,
    /// None where a held-out fold carried a single class.
    pub fold_auc: Vec<Option<f64>>,
    pub mean_accuracy: f64,
    /// Mean over the folds where AUC was defined; 0 when none were.
    pub mean_auc: f64,
}

/// Winning spec with its fitted model and the full CV table in grid
/// declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub table: Vec<CvEntry>,
    pub best_index: usize,
    pub model: AnyModel,
    pub seed: u64,
}

/// How the final model is trained once tuning has picked its spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainProtocol {
    /// Tune by cross-validation, then fit the winner on a bootstrap
    /// resample of the training split.
    #[default]
    BootstrapTrainCvTune,
    /// Tune by cross-validation, then fit the winner on the training
    /// split unchanged.
    PlainCv,
}

fn gather(rows: &[Vec<f64>], labels: &[Label], indices: &[usize]) -> (Vec<Vec<f64>>, Vec<Label>) {
    (
        indices.iter().map(|&i| rows[i].clone()).collect(),
        indices.iter().map(|&i| labels[i]).collect(),
    )
}

/// Strictly better under the tuning order: higher mean accuracy, then
/// higher mean AUC, then smaller complexity. Exact ties keep the
/// incumbent, so earlier grid declaration wins.
fn better(candidate: (f64, f64, f64), incumbent: (f64, f64, f64)) -> bool {
    if candidate.0 != incumbent.0 {
        return candidate.0 > incumbent.0;
    }
    if candidate.1 != incumbent.1 {
        return candidate.1 > incumbent.1;
    }
    candidate.2 < incumbent.2
}

fn cv_entry(
    spec: &ModelSpec,
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
    folds: &FoldPlan,
    seed: u64,
) -> Result<CvEntry, EvalError> {
    let mut fold_accuracy = Vec::with_capacity(folds.k());
    let mut fold_auc = Vec::with_capacity(folds.k());
    for f in 0..folds.k() {
        let (train_idx, test_idx) = folds.split(f);
        let (train_rows, train_labels) = gather(rows, labels, &train_idx);
        let model = spec.fit(&train_rows, &train_labels, features, rng::derive_seed(seed, f as u64))?;
        let (test_rows, test_labels) = gather(rows, labels, &test_idx);
        let predictions: Vec<_> = test_rows.iter().map(|r| model.predict(r)).collect();
        let correct = predictions
            .iter()
            .zip(&test_labels)
            .filter(|(p, l)| p.label == **l)
            .count();
        fold_accuracy.push(correct as f64 / test_labels.len() as f64);
        let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
        fold_auc.push(match roc(&scores, &test_labels) {
            Ok(points) => Some(auc(&points)),
            Err(EvalError::DegenerateLabels) => None,
            Err(e) => return Err(e),
        });
    }
    let mean_accuracy = fold_accuracy.iter().sum::<f64>() / fold_accuracy.len() as f64;
    let defined: Vec<f64> = fold_auc.iter().flatten().copied().collect();
    let mean_auc = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(CvEntry {
        spec: spec.clone(),
        fold_accuracy,
        fold_auc,
        mean_accuracy,
        mean_auc,
    })
}

/// Cross-validates every grid point on the given folds, picks the best
/// by mean accuracy (ties: higher mean AUC, then smaller complexity,
/// then declaration order), and refits it on the full index range.
pub fn grid_tune(
    grid: &[ModelSpec],
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
    folds: &FoldPlan,
    seed: u64,
) -> Result<TuneOutcome, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let table: Vec<CvEntry> =
        par::map_range(grid.len(), |g| cv_entry(&grid[g], rows, labels, features, folds, seed))
            .into_iter()
            .collect::<Result<_, _>>()?;
    let key = |e: &CvEntry| (e.mean_accuracy, e.mean_auc, e.spec.complexity());
    let mut best_index = 0;
    for i in 1..table.len() {
        if better(key(&table[i]), key(&table[best_index])) {
            best_index = i;
        }
    }
    let model = grid[best_index].fit(rows, labels, features, seed)?;
    Ok(TuneOutcome { table, best_index, model, seed })
}

/// Builds the fold plan, tunes, and applies the training protocol to the
/// final fit.
pub fn train_with_protocol(
    grid: &[ModelSpec],
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
    k: usize,
    seed: u64,
    protocol: TrainProtocol,
) -> Result<TuneOutcome, EvalError> {
    let folds = stratified_kfold(labels, k, seed)?;
    let mut outcome = grid_tune(grid, rows, labels, features, &folds, seed)?;
    if protocol == TrainProtocol::BootstrapTrainCvTune {
        let draw = bootstrap_indices(rows.len(), rng::derive_seed(seed, k as u64));
        let (boot_rows, boot_labels) = gather(rows, labels, &draw);
        outcome.model = outcome.table[outcome.best_index].spec.fit(
            &boot_rows,
            &boot_labels,
            features,
            rng::derive_seed(seed, k as u64 + 1),
        )?;
    }
    Ok(outcome)
}
