//! The four classifiers behind the impact task, under one prediction
//! contract: a label plus a HIGH-class probability estimate for ROC work.

mod forest;
mod linear;
mod tree;

pub use forest::{fit_forest, gini_importance, ForestModel, ForestParams};
pub use linear::{fit_lasso, fit_ridge, LassoModel, RidgeModel};
pub use tree::{gini, fit_tree, Counts, TreeModel, TreeNode, TreeParams};

use crate::corpus::Label;
use crate::features::FeatureId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bumped when any serialized model layout changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum LearnerError {
    #[error("training set is empty or too small")]
    EmptyTrainingSet,
    #[error("normal equations are singular; use lambda > 0 on a rank-deficient design")]
    SingularSystem,
}

/// A classified row: hard label plus estimated probability of HIGH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

impl Prediction {
    /// Ties at one half go to HIGH.
    pub fn from_score(score: f64) -> Prediction {
        debug_assert!((0.0..=1.0).contains(&score), "score {score} out of range");
        Prediction {
            label: if score >= 0.5 { Label::High } else { Label::Moderate },
            score,
        }
    }
}

fn default_lasso_tol() -> f64 {
    1e-6
}

fn default_lasso_max_iter() -> usize {
    10_000
}

/// Hyperparameter bundle naming one fit recipe; the unit of grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Ridge {
        lambda: f64,
    },
    Lasso {
        lambda: f64,
        #[serde(default = "default_lasso_tol")]
        tol: f64,
        #[serde(default = "default_lasso_max_iter")]
        max_iter: usize,
    },
    Tree {
        #[serde(flatten)]
        params: TreeParams,
    },
    Forest {
        #[serde(flatten)]
        params: ForestParams,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ridge { .. } => "ridge",
            ModelSpec::Lasso { .. } => "lasso",
            ModelSpec::Tree { .. } => "cart",
            ModelSpec::Forest { .. } => "random_forest",
        }
    }

    /// Scalar used as a tuning tie-break, smaller meaning simpler: inverse
    /// penalty for the linear models, depth cap for trees, ensemble size
    /// for forests.
    pub fn complexity(&self) -> f64 {
        match self {
            ModelSpec::Ridge { lambda } | ModelSpec::Lasso { lambda, .. } => {
                if *lambda > 0.0 {
                    1.0 / lambda
                } else {
                    f64::INFINITY
                }
            }
            ModelSpec::Tree { params } => {
                params.max_depth.map_or(f64::INFINITY, |d| d as f64)
            }
            ModelSpec::Forest { params } => params.n_trees as f64,
        }
    }

    /// Fits this recipe. `seed` feeds the forest's bootstrap and per-split
    /// sampling; the other families are deterministic and ignore it.
    pub fn fit(
        &self,
        rows: &[Vec<f64>],
        labels: &[Label],
        features: &[FeatureId],
        seed: u64,
    ) -> Result<AnyModel, LearnerError> {
        Ok(match self {
            ModelSpec::Ridge { lambda } => {
                AnyModel::Ridge(fit_ridge(rows, labels, features, *lambda)?)
            }
            ModelSpec::Lasso { lambda, tol, max_iter } => {
                AnyModel::Lasso(fit_lasso(rows, labels, features, *lambda, *tol, *max_iter)?)
            }
            ModelSpec::Tree { params } => AnyModel::Tree(fit_tree(rows, labels, features, params)?),
            ModelSpec::Forest { params } => {
                AnyModel::Forest(fit_forest(rows, labels, features, params, seed)?)
            }
        })
    }
}

/// A fitted model of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AnyModel {
    Ridge(RidgeModel),
    Lasso(LassoModel),
    Tree(TreeModel),
    Forest(ForestModel),
}

impl AnyModel {
    pub fn name(&self) -> &'static str {
        match self {
            AnyModel::Ridge(_) => "ridge",
            AnyModel::Lasso(_) => "lasso",
            AnyModel::Tree(_) => "cart",
            AnyModel::Forest(_) => "random_forest",
        }
    }

    pub fn features(&self) -> &[FeatureId] {
        match self {
            AnyModel::Ridge(m) => &m.features,
            AnyModel::Lasso(m) => &m.features,
            AnyModel::Tree(m) => &m.features,
            AnyModel::Forest(m) => &m.features,
        }
    }

    pub fn predict(&self, row: &[f64]) -> Prediction {
        match self {
            AnyModel::Ridge(m) => m.predict(row),
            AnyModel::Lasso(m) => m.predict(row),
            AnyModel::Tree(m) => m.predict(row),
            AnyModel::Forest(m) => m.predict(row),
        }
    }
}
