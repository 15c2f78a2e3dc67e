//! Split protocol, headline metrics, and hyperparameter tuning for the
//! impact classifiers: stratified holdout and k-fold plans, bootstrap
//! resampling, accuracy with per-class and support-weighted
//! precision/recall/F1, the ROC sweep, and grid search over model specs.

mod roc;
mod split;
mod tune;

pub use roc::{auc, roc, RocPoint};
pub use split::{bootstrap_indices, stratified_holdout, stratified_kfold, FoldPlan, SplitPlan};
pub use tune::{grid_tune, train_with_protocol, CvEntry, TrainProtocol, TuneOutcome};

use crate::corpus::Label;
use crate::learners::{LearnerError, Prediction};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no samples to evaluate")]
    Empty,
    #[error("predictions and labels differ in length ({predictions} vs {labels})")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("both classes must be present to sweep a curve")]
    DegenerateLabels,
    #[error("split ratio must lie strictly between 0 and 1, got {0}")]
    InvalidRatio(f64),
    #[error("cross-validation needs k >= 2, got {0}")]
    KTooSmall(usize),
    #[error("k = {k} exceeds the {n} available samples")]
    KTooLarge { k: usize, n: usize },
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// Two-by-two contingency of observed against predicted labels, classes
/// in `Label::index` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// counts[observed][predicted]
    pub counts: [[usize; 2]; 2],
    /// Column-normalized percentages; each nonempty predicted column sums
    /// to 100.
    pub percent: [[f64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_pairs<'a>(
        pairs: impl Iterator<Item = (&'a Label, &'a Label)>,
    ) -> ConfusionMatrix {
        let mut counts = [[0usize; 2]; 2];
        for (observed, predicted) in pairs {
            counts[observed.index()][predicted.index()] += 1;
        }
        let mut percent = [[0.0f64; 2]; 2];
        for predicted in 0..2 {
            let column: usize = counts[0][predicted] + counts[1][predicted];
            if column > 0 {
                for observed in 0..2 {
                    percent[observed][predicted] =
                        100.0 * counts[observed][predicted] as f64 / column as f64;
                }
            }
        }
        ConfusionMatrix { counts, percent }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

/// Precision and recall for one class, with its observed support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
}

/// One model's scoreboard on one evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Which model produced the predictions; empty until provenance is
    /// attached.
    pub model: String,
    pub seed: u64,
    /// Held-out fold index when the report comes from cross-validation.
    pub fold: Option<usize>,
    pub n: usize,
    pub accuracy: f64,
    pub high: ClassMetrics,
    pub moderate: ClassMetrics,
    /// Support-weighted averages over the two classes.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// None when the evaluation set holds a single class.
    pub auc: Option<f64>,
    pub roc: Vec<RocPoint>,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    pub fn with_provenance(
        mut self,
        model: impl Into<String>,
        seed: u64,
        fold: Option<usize>,
    ) -> EvalReport {
        self.model = model.into();
        self.seed = seed;
        self.fold = fold;
        self
    }
}

fn ratio_or_zero(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Scores predictions against observed labels. Division by an empty
/// class or column yields 0 rather than NaN.
pub fn evaluate(predictions: &[Prediction], labels: &[Label]) -> Result<EvalReport, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = labels.len();
    let predicted_labels: Vec<Label> = predictions.iter().map(|p| p.label).collect();
    let confusion = ConfusionMatrix::from_pairs(labels.iter().zip(predicted_labels.iter()));
    let counts = &confusion.counts;
    let accuracy = (counts[0][0] + counts[1][1]) as f64 / n as f64;

    let mut per_class = [ClassMetrics { precision: 0.0, recall: 0.0, support: 0 }; 2];
    for (c, metrics) in per_class.iter_mut().enumerate() {
        let support = counts[c][0] + counts[c][1];
        let predicted = counts[0][c] + counts[1][c];
        *metrics = ClassMetrics {
            precision: ratio_or_zero(counts[c][c], predicted),
            recall: ratio_or_zero(counts[c][c], support),
            support,
        };
    }

    let weighted = |f: &dyn Fn(&ClassMetrics) -> f64| -> f64 {
        per_class
            .iter()
            .map(|m| m.support as f64 * f(m))
            .sum::<f64>()
            / n as f64
    };
    let f1_of = |m: &ClassMetrics| {
        if m.precision + m.recall == 0.0 {
            0.0
        } else {
            2.0 * m.precision * m.recall / (m.precision + m.recall)
        }
    };

    let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
    let (auc_value, roc_points) = match roc(&scores, labels) {
        Ok(points) => (Some(auc(&points)), points),
        Err(EvalError::DegenerateLabels) => (None, Vec::new()),
        Err(e) => return Err(e),
    };

    Ok(EvalReport {
        model: String::new(),
        seed: 0,
        fold: None,
        n,
        accuracy,
        high: per_class[0],
        moderate: per_class[1],
        precision: weighted(&|m| m.precision),
        recall: weighted(&|m| m.recall),
        f1: weighted(&f1_of),
        auc: auc_value,
        roc: roc_points,
        confusion,
    })
}
