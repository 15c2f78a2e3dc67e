//! Easability components: corpus-relative composites on top of the cohesion
//! and connective columns.

use serde::{Deserialize, Serialize};

use crate::features::{FeatureError, FeatureId, FeatureMatrix};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EasabilityComponent {
    RefCohesion,
    Connectivity,
}

const REF_CONSTITUENTS: [&str; 7] = [
    "cohesion.cw_overlap_adj",
    "cohesion.cw_overlap_all",
    "cohesion.noun_overlap_adj",
    "cohesion.noun_overlap_all",
    "cohesion.argument_overlap_all",
    "cohesion.anaphor_overlap_adj",
    "lsa.overlap_adj",
];

/// Per-document `(z, percentile)` for one component, computed from the
/// matrix's own columns. Referential cohesion is the mean of the corpus
/// z-scores of its seven constituent columns; connectivity is the z-score of
/// the connectives incidence. Percentile is `100 * Phi(z)`.
pub fn easability_pc(
    matrix: &FeatureMatrix,
    component: EasabilityComponent,
) -> Result<Vec<(f64, f64)>, FeatureError> {
    if matrix.n_docs() < 2 {
        return Err(FeatureError::DegenerateCorpus(
            "easability components need at least two documents".into(),
        ));
    }
    let column = |name: &str| -> Result<Vec<f64>, FeatureError> {
        let id = FeatureId::from(name);
        let col = matrix
            .feature_index(&id)
            .ok_or(FeatureError::MissingConstituent(id))?;
        matrix.dense_column(col)
    };

    let z: Vec<f64> = match component {
        EasabilityComponent::RefCohesion => {
            let z_cols: Vec<Vec<f64>> = REF_CONSTITUENTS
                .iter()
                .map(|c| Ok(stats::zscores(&column(c)?)))
                .collect::<Result<_, FeatureError>>()?;
            (0..matrix.n_docs())
                .map(|i| z_cols.iter().map(|c| c[i]).sum::<f64>() / z_cols.len() as f64)
                .collect()
        }
        EasabilityComponent::Connectivity => stats::zscores(&column("incidence.connectives")?),
    };
    Ok(z.into_iter()
        .map(|z| (z, 100.0 * stats::normal_cdf(z)))
        .collect())
}
