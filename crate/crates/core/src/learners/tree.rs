//! CART classification tree: greedy Gini splits at midpoints of consecutive
//! distinct values, then minimal cost-complexity pruning.

use super::{LearnerError, Prediction, FORMAT_VERSION};
use crate::corpus::Label;
use crate::features::FeatureId;
use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Depth cap; the root sits at depth 0. `None` leaves depth unbounded.
    pub max_depth: Option<usize>,
    /// Nodes with fewer samples become leaves.
    pub min_samples_split: usize,
    /// Smallest weighted Gini decrease worth a split.
    pub min_impurity_decrease: f64,
    /// Cost-complexity pruning strength. Zero disables pruning; a positive
    /// value collapses every subtree whose effective alpha is at most this.
    pub ccp_alpha: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            min_impurity_decrease: 0.0,
            ccp_alpha: 0.0,
        }
    }
}

/// Class counts indexed by `Label::index`: HIGH first, MODERATE second.
pub type Counts = [usize; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature: FeatureId,
        /// Column position of `feature` in the model's feature list.
        feature_index: usize,
        /// Left child holds samples with value <= threshold.
        threshold: f64,
        counts: Counts,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf { counts: Counts, n: usize },
}

impl TreeNode {
    pub fn counts(&self) -> Counts {
        match self {
            TreeNode::Internal { counts, .. } => *counts,
            TreeNode::Leaf { counts, .. } => *counts,
        }
    }

    pub fn n(&self) -> usize {
        let c = self.counts();
        c[0] + c[1]
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub format_version: u32,
    pub features: Vec<FeatureId>,
    pub params: TreeParams,
    pub root: TreeNode,
}

impl TreeModel {
    pub fn predict(&self, row: &[f64]) -> Prediction {
        assert_eq!(row.len(), self.features.len(), "row width mismatch");
        Prediction::from_score(leaf_score(&self.root, row))
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

fn leaf_score(node: &TreeNode, row: &[f64]) -> f64 {
    match node {
        TreeNode::Leaf { counts, n } => counts[0] as f64 / *n as f64,
        TreeNode::Internal { feature_index, threshold, left, right, .. } => {
            if row[*feature_index] <= *threshold {
                leaf_score(left, row)
            } else {
                leaf_score(right, row)
            }
        }
    }
}

pub fn gini(counts: Counts) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

/// How `grow` picks the columns competing at one split.
pub(crate) enum FeatureSampler {
    All,
    /// Draw `mtry` distinct columns afresh at every split.
    Random { mtry: usize, rng: ChaCha8Rng },
}

impl FeatureSampler {
    fn candidates(&mut self, p: usize) -> Vec<usize> {
        match self {
            FeatureSampler::All => (0..p).collect(),
            FeatureSampler::Random { mtry, rng } => {
                let mut idx: Vec<usize> = sample(rng, p, (*mtry).min(p)).into_vec();
                // Ascending order keeps the lower-feature-index tie rule
                // meaningful under random subsets.
                idx.sort_unstable();
                idx
            }
        }
    }
}

pub fn fit_tree(
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
    params: &TreeParams,
) -> Result<TreeModel, LearnerError> {
    if rows.is_empty() {
        return Err(LearnerError::EmptyTrainingSet);
    }
    assert_eq!(rows.len(), labels.len(), "one label per row");
    let indices: Vec<usize> = (0..rows.len()).collect();
    let root = grow(rows, labels, features, params, indices, 0, &mut FeatureSampler::All);
    let root = prune(root, params.ccp_alpha, rows.len() as f64);
    Ok(TreeModel {
        format_version: FORMAT_VERSION,
        features: features.to_vec(),
        params: params.clone(),
        root,
    })
}

pub(crate) fn grow(
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
    params: &TreeParams,
    indices: Vec<usize>,
    depth: usize,
    sampler: &mut FeatureSampler,
) -> TreeNode {
    let mut counts: Counts = [0, 0];
    for &i in &indices {
        counts[labels[i].index()] += 1;
    }
    let n = indices.len();
    let leaf = |counts: Counts| TreeNode::Leaf { counts, n };
    let pure = counts[0] == 0 || counts[1] == 0;
    let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
    if pure || n < params.min_samples_split || depth_capped {
        return leaf(counts);
    }

    let Some((_, feature_index, threshold)) =
        best_split(rows, labels, &indices, counts, params, sampler)
    else {
        return leaf(counts);
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| rows[i][feature_index] <= threshold);
    let left = grow(rows, labels, features, params, left_idx, depth + 1, sampler);
    let right = grow(rows, labels, features, params, right_idx, depth + 1, sampler);
    TreeNode::Internal {
        feature: features[feature_index].clone(),
        feature_index,
        threshold,
        counts,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Best (decrease, feature, threshold) over the sampled columns, or None when
/// no split strictly decreases impurity by at least the configured minimum.
/// Scanning features ascending and thresholds ascending with a
/// strictly-greater update realizes the documented tie rule.
fn best_split(
    rows: &[Vec<f64>],
    labels: &[Label],
    indices: &[usize],
    counts: Counts,
    params: &TreeParams,
    sampler: &mut FeatureSampler,
) -> Option<(f64, usize, f64)> {
    let p = rows[indices[0]].len();
    let n = indices.len() as f64;
    let parent_gini = gini(counts);
    let mut best: Option<(f64, usize, f64)> = None;
    for j in sampler.candidates(p) {
        let mut vals: Vec<(f64, usize)> = indices
            .iter()
            .map(|&i| (rows[i][j], labels[i].index()))
            .collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));
        let mut left: Counts = [0, 0];
        for w in 0..vals.len() - 1 {
            left[vals[w].1] += 1;
            if vals[w].0 == vals[w + 1].0 {
                continue;
            }
            let threshold = vals[w].0 + (vals[w + 1].0 - vals[w].0) / 2.0;
            let right: Counts = [counts[0] - left[0], counts[1] - left[1]];
            let n_left = (left[0] + left[1]) as f64;
            let n_right = n - n_left;
            let decrease =
                parent_gini - n_left / n * gini(left) - n_right / n * gini(right);
            if decrease > 0.0
                && decrease >= params.min_impurity_decrease
                && best.is_none_or(|(d, _, _)| decrease > d)
            {
                best = Some((decrease, j, threshold));
            }
        }
    }
    best
}

/// Minimal cost-complexity pruning: repeatedly collapse the weakest links,
/// the subtrees with the smallest effective alpha, while that alpha is at
/// most `ccp_alpha`. Alpha zero returns the tree untouched.
pub(crate) fn prune(mut root: TreeNode, ccp_alpha: f64, n_root: f64) -> TreeNode {
    if ccp_alpha <= 0.0 {
        return root;
    }
    loop {
        let mut weakest = f64::INFINITY;
        find_weakest(&root, n_root, &mut weakest);
        if weakest > ccp_alpha {
            return root;
        }
        collapse(&mut root, n_root, weakest);
    }
}

/// Misclassified-fraction of a node if it were a leaf.
fn node_risk(counts: Counts, n_root: f64) -> f64 {
    (counts[0].min(counts[1])) as f64 / n_root
}

/// (leaf count, summed leaf risk) of a subtree.
fn subtree_risk(node: &TreeNode, n_root: f64) -> (usize, f64) {
    match node {
        TreeNode::Leaf { counts, .. } => (1, node_risk(*counts, n_root)),
        TreeNode::Internal { left, right, .. } => {
            let (ll, lr) = subtree_risk(left, n_root);
            let (rl, rr) = subtree_risk(right, n_root);
            (ll + rl, lr + rr)
        }
    }
}

fn effective_alpha(node: &TreeNode, n_root: f64) -> Option<f64> {
    match node {
        TreeNode::Leaf { .. } => None,
        TreeNode::Internal { counts, .. } => {
            let (leaves, risk) = subtree_risk(node, n_root);
            Some((node_risk(*counts, n_root) - risk) / (leaves - 1) as f64)
        }
    }
}

fn find_weakest(node: &TreeNode, n_root: f64, weakest: &mut f64) {
    if let TreeNode::Internal { left, right, .. } = node {
        if let Some(alpha) = effective_alpha(node, n_root) {
            *weakest = weakest.min(alpha);
        }
        find_weakest(left, n_root, weakest);
        find_weakest(right, n_root, weakest);
    }
}

/// Collapses every highest internal node whose effective alpha equals the
/// current weakest link; descendants go with it.
fn collapse(node: &mut TreeNode, n_root: f64, weakest: f64) {
    if effective_alpha(node, n_root) == Some(weakest) {
        let counts = node.counts();
        *node = TreeNode::Leaf { counts, n: counts[0] + counts[1] };
        return;
    }
    if let TreeNode::Internal { left, right, .. } = node {
        collapse(left, n_root, weakest);
        collapse(right, n_root, weakest);
    }
}
