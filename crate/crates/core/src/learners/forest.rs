//! Random forest: seeded bootstrap bagging over CART trees with a fresh
//! random feature subset at every split.

use super::tree::{gini, grow, prune, FeatureSampler, TreeModel, TreeNode, TreeParams};
use super::{LearnerError, Prediction, FORMAT_VERSION};
use crate::corpus::Label;
use crate::features::FeatureId;
use crate::par;
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features drawn per split; `None` means floor(sqrt(p)).
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 20,
            mtry: None,
            bootstrap: true,
            tree: TreeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub features: Vec<FeatureId>,
    pub params: ForestParams,
    /// Features actually drawn per split after resolving the default.
    pub mtry_used: usize,
    pub seed: u64,
    pub trees: Vec<TreeModel>,
    /// Out-of-bag flag per tree per training row: true when the row never
    /// entered that tree's bootstrap sample.
    pub oob: Vec<Vec<bool>>,
}

/// Trains `params.n_trees` trees, each from its own seed derived from
/// (`seed`, tree index), so the result is independent of scheduling.
pub fn fit_forest(
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, LearnerError> {
    if rows.len() < 2 {
        return Err(LearnerError::EmptyTrainingSet);
    }
    assert_eq!(rows.len(), labels.len(), "one label per row");
    assert!(params.n_trees >= 1, "need at least one tree");
    let n = rows.len();
    let p = features.len();
    let mtry = params.mtry.unwrap_or_else(|| (p as f64).sqrt().floor() as usize).clamp(1, p);

    let grown = par::map_range(params.n_trees, |t| {
        let mut tree_rng = rng::seeded(rng::derive_seed(seed, t as u64));
        let (indices, oob) = if params.bootstrap {
            let mut in_bag = vec![false; n];
            let indices: Vec<usize> = (0..n)
                .map(|_| {
                    let i = tree_rng.gen_range(0..n);
                    in_bag[i] = true;
                    i
                })
                .collect();
            let oob: Vec<bool> = in_bag.iter().map(|b| !b).collect();
            (indices, oob)
        } else {
            ((0..n).collect(), vec![false; n])
        };
        let mut sampler = if mtry < p {
            FeatureSampler::Random { mtry, rng: tree_rng }
        } else {
            FeatureSampler::All
        };
        let root = grow(rows, labels, features, &params.tree, indices, 0, &mut sampler);
        let root = prune(root, params.tree.ccp_alpha, n as f64);
        let model = TreeModel {
            format_version: FORMAT_VERSION,
            features: features.to_vec(),
            params: params.tree.clone(),
            root,
        };
        (model, oob)
    });

    let (trees, oob) = grown.into_iter().unzip();
    Ok(ForestModel {
        format_version: FORMAT_VERSION,
        features: features.to_vec(),
        params: params.clone(),
        mtry_used: mtry,
        seed,
        trees,
        oob,
    })
}

impl ForestModel {
    /// Mean over trees of the reached leaf's HIGH proportion.
    pub fn predict(&self, row: &[f64]) -> Prediction {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row).score).sum();
        Prediction::from_score(sum / self.trees.len() as f64)
    }
}

/// Split-weighted impurity importance, normalized to sum 1. Every model
/// feature appears in the map; an all-leaf forest yields all zeros.
pub fn gini_importance(forest: &ForestModel) -> BTreeMap<FeatureId, f64> {
    let mut totals = vec![0.0f64; forest.features.len()];
    for tree in &forest.trees {
        let n_root = tree.root.n() as f64;
        accumulate(&tree.root, n_root, &mut totals);
    }
    for t in totals.iter_mut() {
        *t /= forest.trees.len() as f64;
    }
    let sum: f64 = totals.iter().sum();
    forest
        .features
        .iter()
        .zip(&totals)
        .map(|(f, &t)| (f.clone(), if sum > 0.0 { t / sum } else { 0.0 }))
        .collect()
}

fn accumulate(node: &TreeNode, n_root: f64, totals: &mut [f64]) {
    if let TreeNode::Internal { feature_index, counts, left, right, .. } = node {
        let n = node.n() as f64;
        let lc = left.counts();
        let rc = right.counts();
        let n_left = left.n() as f64;
        let n_right = right.n() as f64;
        let decrease = gini(*counts) - n_left / n * gini(lc) - n_right / n * gini(rc);
        totals[*feature_index] += decrease * (n / n_root);
        accumulate(left, n_root, totals);
        accumulate(right, n_root, totals);
    }
}
