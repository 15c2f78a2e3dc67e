//! Filter feature selection: four model-free relevance scorers over the
//! feature matrix, per-method rankings, and rank aggregation down to a
//! selected subset.

mod chi2;
mod discretize;
mod infogain;
mod mwu;
mod relieff;

pub use chi2::{chi_square, chi_square_from_counts};
pub use discretize::{discretize, Discretized};
pub use infogain::{entropy_bits, info_gain};
pub use mwu::{mann_whitney, MwuResult};
pub use relieff::relieff;

use crate::corpus::Label;
use crate::features::{FeatureError, FeatureId, FeatureMatrix};
use crate::par;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "CHI2")]
    Chi2,
    #[serde(rename = "MWU")]
    Mwu,
    #[serde(rename = "INFOGAIN")]
    InfoGain,
    #[serde(rename = "RELIEFF")]
    ReliefF,
}

pub const METHODS: [Method; 4] = [Method::Chi2, Method::Mwu, Method::InfoGain, Method::ReliefF];

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Chi2 => "CHI2",
            Method::Mwu => "MWU",
            Method::InfoGain => "INFOGAIN",
            Method::ReliefF => "RELIEFF",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("all documents share one class")]
    SingleClass,
    #[error("method {0} is missing from the score tables")]
    MethodMissing(Method),
    #[error("methods scored different feature sets")]
    MismatchedFeatures,
    #[error("column `{0}` has missing values; impute before scoring")]
    IncompleteColumn(FeatureId),
    #[error("unknown feature id `{0}`")]
    UnknownFeature(FeatureId),
    #[error("matrix has no features")]
    EmptyMatrix,
}

/// One feature scored by one method. `rank` 1 is the most relevant feature
/// under that method; ranks are a permutation of 1..=p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub feature: FeatureId,
    pub method: Method,
    pub statistic: f64,
    /// Tail probability where the method defines one (CHI2, MWU).
    pub p_value: Option<f64>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTable {
    pub method: Method,
    /// Sorted by rank ascending.
    pub scores: Vec<MethodScore>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AggregationMode {
    /// Mean rank across the four methods, smallest first.
    BordaMeanRank,
    /// Keep features placed in at least `min_methods` methods' top K.
    TopKVotes { min_methods: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Target subset size.
    pub k: usize,
    /// Equal-frequency bin count for the discrete scorers.
    pub bins: usize,
    /// Neighbor count for ReliefF.
    pub relieff_k: usize,
    pub seed: u64,
    pub mode: AggregationMode,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            k: 25,
            bins: 4,
            relieff_k: 10,
            seed: 7,
            mode: AggregationMode::BordaMeanRank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// One table per method, in `METHODS` order.
    pub tables: Vec<MethodTable>,
    /// Mean rank across methods, the Borda aggregate.
    pub mean_ranks: BTreeMap<FeatureId, f64>,
    /// Chosen subset, most relevant first.
    pub selected: Vec<FeatureId>,
    pub config: SelectionConfig,
}

/// Scores every column of a dense matrix with all four methods and
/// aggregates the rankings into a selected subset.
pub fn score_matrix(
    matrix: &FeatureMatrix,
    cfg: &SelectionConfig,
) -> Result<SelectionReport, SelectionError> {
    if matrix.n_features() == 0 {
        return Err(SelectionError::EmptyMatrix);
    }
    let rows = matrix.dense_rows().map_err(incomplete)?;
    let labels = &matrix.labels;
    let n_high = labels.iter().filter(|l| **l == Label::High).count();
    if n_high == 0 || n_high == labels.len() {
        return Err(SelectionError::SingleClass);
    }

    let p = matrix.n_features();
    let per_column = par::map_range(p, |c| {
        let column: Vec<f64> = rows.iter().map(|r| r[c]).collect();
        let (chi_stat, chi_p) = chi_square(&column, labels, cfg.bins);
        let a: Vec<f64> = column
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == Label::High)
            .map(|(v, _)| *v)
            .collect();
        let b: Vec<f64> = column
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == Label::Moderate)
            .map(|(v, _)| *v)
            .collect();
        let mwu = mann_whitney(&a, &b);
        let ig = info_gain(&column, labels, cfg.bins);
        (chi_stat, chi_p, mwu, ig)
    });
    let weights = relieff(&rows, labels, cfg.relieff_k, cfg.seed)?;

    let table = |method: Method, stats: Vec<f64>, ps: Vec<Option<f64>>| -> MethodTable {
        let ranks = rank_descending(&matrix.features, &stats);
        let mut scores: Vec<MethodScore> = (0..p)
            .map(|c| MethodScore {
                feature: matrix.features[c].clone(),
                method,
                statistic: stats[c],
                p_value: ps[c],
                rank: ranks[c],
            })
            .collect();
        scores.sort_by_key(|s| s.rank);
        MethodTable { method, scores }
    };

    let tables = vec![
        table(
            Method::Chi2,
            per_column.iter().map(|x| x.0).collect(),
            per_column.iter().map(|x| Some(x.1)).collect(),
        ),
        table(
            Method::Mwu,
            per_column.iter().map(|x| x.2.z.abs()).collect(),
            per_column.iter().map(|x| Some(x.2.p)).collect(),
        ),
        table(
            Method::InfoGain,
            per_column.iter().map(|x| x.3).collect(),
            vec![None; p],
        ),
        table(Method::ReliefF, weights, vec![None; p]),
    ];
    aggregate(tables, cfg)
}

/// Ranks features by descending statistic; equal statistics fall back to
/// lexicographic feature id, so ranks are a stable permutation of 1..=p.
fn rank_descending(features: &[FeatureId], stats: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&i, &j| {
        stats[j]
            .partial_cmp(&stats[i])
            .expect("finite statistics")
            .then_with(|| features[i].cmp(&features[j]))
    });
    let mut ranks = vec![0usize; stats.len()];
    for (rank0, &c) in order.iter().enumerate() {
        ranks[c] = rank0 + 1;
    }
    ranks
}

/// Folds per-method tables into mean ranks and the selected subset.
pub fn aggregate(
    tables: Vec<MethodTable>,
    cfg: &SelectionConfig,
) -> Result<SelectionReport, SelectionError> {
    for method in METHODS {
        if !tables.iter().any(|t| t.method == method) {
            return Err(SelectionError::MethodMissing(method));
        }
    }
    let feature_sets: Vec<BTreeSet<&FeatureId>> = tables
        .iter()
        .map(|t| t.scores.iter().map(|s| &s.feature).collect())
        .collect();
    if feature_sets.iter().any(|s| *s != feature_sets[0]) {
        return Err(SelectionError::MismatchedFeatures);
    }

    let mut rank_sums: BTreeMap<FeatureId, usize> = BTreeMap::new();
    for t in &tables {
        for s in &t.scores {
            *rank_sums.entry(s.feature.clone()).or_insert(0) += s.rank;
        }
    }
    let mean_ranks: BTreeMap<FeatureId, f64> = rank_sums
        .into_iter()
        .map(|(f, sum)| (f, sum as f64 / tables.len() as f64))
        .collect();

    let mut by_mean: Vec<(&FeatureId, f64)> = mean_ranks.iter().map(|(f, &m)| (f, m)).collect();
    by_mean.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite ranks").then_with(|| a.0.cmp(b.0)));

    let selected: Vec<FeatureId> = match cfg.mode {
        AggregationMode::BordaMeanRank => by_mean
            .iter()
            .take(cfg.k.min(by_mean.len()))
            .map(|(f, _)| (*f).clone())
            .collect(),
        AggregationMode::TopKVotes { min_methods } => {
            let mut votes: BTreeMap<&FeatureId, usize> = BTreeMap::new();
            for t in &tables {
                for s in t.scores.iter().filter(|s| s.rank <= cfg.k) {
                    *votes.entry(&s.feature).or_insert(0) += 1;
                }
            }
            by_mean
                .iter()
                .filter(|(f, _)| votes.get(f).copied().unwrap_or(0) >= min_methods)
                .map(|(f, _)| (*f).clone())
                .collect()
        }
    };
    Ok(SelectionReport {
        tables,
        mean_ranks,
        selected,
        config: cfg.clone(),
    })
}

/// Copies the matrix keeping only `keep` columns, in `keep` order.
pub fn reduce_matrix(
    matrix: &FeatureMatrix,
    keep: &[FeatureId],
) -> Result<FeatureMatrix, SelectionError> {
    let cols: Vec<usize> = keep
        .iter()
        .map(|f| {
            matrix
                .feature_index(f)
                .ok_or_else(|| SelectionError::UnknownFeature(f.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut out = FeatureMatrix::new(
        matrix.doc_ids.clone(),
        matrix.labels.clone(),
        keep.to_vec(),
    );
    for (i, row) in matrix.values.iter().enumerate() {
        for (new_c, &old_c) in cols.iter().enumerate() {
            out.values[i][new_c] = row[old_c];
        }
    }
    out.meta = matrix.meta.clone();
    out.meta.imputed_cells.retain(|f, _| keep.contains(f));
    Ok(out)
}

fn incomplete(e: FeatureError) -> SelectionError {
    match e {
        FeatureError::IncompleteColumn(f) => SelectionError::IncompleteColumn(f),
        other => panic!("dense_rows can only fail on missing cells: {other}"),
    }
}
