//! Feature extraction: per-document linguistic indicators assembled into a
//! corpus matrix.

mod easability;
mod lsa;
mod overlap;
mod wordinfo;

pub use easability::{easability_pc, EasabilityComponent};
pub use lsa::{fit_lsa, lsa_given_new, lsa_overlap, LsaSpace};
pub use overlap::{overlap_score, OverlapKind, PairScope};
pub use wordinfo::{
    connectives_incidence, incidence, log_freq_mean, norm_mean, IncidenceBasis, NormField,
    TokenSubset,
};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Label, PreparedDocument};
use crate::lexicons::{CategoryId, FrequencyTable, Lexicon, NormsTable};
use crate::par;
use crate::stats;

/// Namespaced feature identifier, e.g. `cohesion.noun_overlap_all`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureId(String);

impl FeatureId {
    pub fn new(id: impl Into<String>) -> Self {
        FeatureId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FeatureId {
    fn from(s: &str) -> Self {
        FeatureId(s.to_string())
    }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("document {0} has no countable tokens")]
    EmptyDocument(String),
    #[error("degenerate corpus: {0}")]
    DegenerateCorpus(String),
    #[error("easability component needs column `{0}` in the matrix")]
    MissingConstituent(FeatureId),
    #[error("unknown feature id `{0}`")]
    UnknownFeature(FeatureId),
    #[error("column `{0}` still has missing values")]
    IncompleteColumn(FeatureId),
    #[error("matrix io: {0}")]
    Io(#[from] std::io::Error),
    #[error("matrix csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad cell at row {row}, column `{column}`")]
    BadCell { row: u64, column: String },
}

/// Extraction bookkeeping carried with the matrix.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub imputed_cells: BTreeMap<FeatureId, usize>,
    pub lsa_k: usize,
    pub lsa_rank: usize,
    pub lsa_seed: u64,
}

/// Rectangular doc × feature grid. `None` cells are missing values awaiting
/// imputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub doc_ids: Vec<String>,
    pub labels: Vec<Label>,
    pub features: Vec<FeatureId>,
    pub values: Vec<Vec<Option<f64>>>,
    #[serde(default)]
    pub meta: MatrixMeta,
}

impl FeatureMatrix {
    pub fn new(doc_ids: Vec<String>, labels: Vec<Label>, features: Vec<FeatureId>) -> Self {
        let rows = doc_ids.len();
        let cols = features.len();
        assert_eq!(doc_ids.len(), labels.len(), "one label per doc");
        FeatureMatrix {
            doc_ids,
            labels,
            features,
            values: vec![vec![None; cols]; rows],
            meta: MatrixMeta::default(),
        }
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_index(&self, id: &FeatureId) -> Option<usize> {
        self.features.iter().position(|f| f == id)
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|row| row[col]).collect()
    }

    /// Column as dense values; fails if any cell is still missing.
    pub fn dense_column(&self, col: usize) -> Result<Vec<f64>, FeatureError> {
        self.values
            .iter()
            .map(|row| row[col].ok_or_else(|| FeatureError::IncompleteColumn(self.features[col].clone())))
            .collect()
    }

    /// Whole grid as dense rows; fails if anything is missing.
    pub fn dense_rows(&self) -> Result<Vec<Vec<f64>>, FeatureError> {
        self.values
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(c, v)| {
                        v.ok_or_else(|| FeatureError::IncompleteColumn(self.features[c].clone()))
                    })
                    .collect()
            })
            .collect()
    }

    /// Replace every missing cell with its column mean (0.0 for an all-missing
    /// column) and record the per-column imputation counts in the metadata.
    pub fn impute_column_means(&mut self) -> BTreeMap<FeatureId, usize> {
        let mut counts = BTreeMap::new();
        for col in 0..self.n_features() {
            let mut sum = 0.0;
            let mut n = 0usize;
            for row in &self.values {
                if let Some(v) = row[col] {
                    sum += v;
                    n += 1;
                }
            }
            let mean = if n > 0 { sum / n as f64 } else { 0.0 };
            let mut imputed = 0usize;
            for row in &mut self.values {
                if row[col].is_none() {
                    row[col] = Some(mean);
                    imputed += 1;
                }
            }
            if imputed > 0 {
                counts.insert(self.features[col].clone(), imputed);
            }
        }
        self.meta.imputed_cells = counts.clone();
        counts
    }

    /// CSV with header `doc_id,label,<feature...>`; missing cells are empty.
    pub fn write_csv(&self, path: &Path) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["doc_id".to_string(), "label".to_string()];
        header.extend(self.features.iter().map(|f| f.as_str().to_string()));
        w.write_record(&header)?;
        for (i, row) in self.values.iter().enumerate() {
            let mut record = vec![self.doc_ids[i].clone(), self.labels[i].to_string()];
            record.extend(row.iter().map(|v| match v {
                Some(x) => format!("{x}"),
                None => String::new(),
            }));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<FeatureMatrix, FeatureError> {
        let mut r = csv::ReaderBuilder::new().from_path(path)?;
        let headers = r.headers()?.clone();
        let mut cols = headers.iter();
        if cols.next() != Some("doc_id") || cols.next() != Some("label") {
            return Err(FeatureError::BadCell {
                row: 1,
                column: "header".into(),
            });
        }
        let features: Vec<FeatureId> = cols.map(FeatureId::from).collect();
        let mut doc_ids = Vec::new();
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for record in r.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            doc_ids.push(record.get(0).unwrap_or("").to_string());
            let label_str = record.get(1).unwrap_or("");
            labels.push(Label::parse(label_str).ok_or(FeatureError::BadCell {
                row: line,
                column: "label".into(),
            })?);
            let mut row = Vec::with_capacity(features.len());
            for (j, f) in features.iter().enumerate() {
                let cell = record.get(j + 2).unwrap_or("");
                if cell.is_empty() {
                    row.push(None);
                } else {
                    let v: f64 = cell.parse().map_err(|_| FeatureError::BadCell {
                        row: line,
                        column: f.as_str().to_string(),
                    })?;
                    row.push(Some(v));
                }
            }
            values.push(row);
        }
        Ok(FeatureMatrix {
            doc_ids,
            labels,
            features,
            values,
            meta: MatrixMeta::default(),
        })
    }
}

/// The default working registry: the cohesion, LSA, word-information, and
/// category-incidence indicators plus the two easability components.
pub fn default_registry() -> Vec<FeatureId> {
    [
        "cohesion.cw_overlap_adj",
        "cohesion.cw_overlap_all",
        "cohesion.noun_overlap_adj",
        "cohesion.noun_overlap_all",
        "cohesion.argument_overlap_all",
        "cohesion.anaphor_overlap_adj",
        "lsa.overlap_adj",
        "lsa.overlap_all",
        "lsa.given_new",
        "wordinfo.concreteness_all",
        "wordinfo.concreteness_content",
        "wordinfo.imageability_content",
        "wordinfo.log_freq_all",
        "incidence.pronoun_second",
        "incidence.pronoun_third_plural",
        "liwc.auxverb",
        "liwc.focuspast",
        "liwc.focuspresent",
        "liwc.focusfuture",
        "liwc.article",
        "liwc.number",
        "liwc.posemo",
        "liwc.cause",
        "easability.pc_ref_cohesion_z",
        "easability.pc_connectivity_z",
    ]
    .into_iter()
    .map(FeatureId::from)
    .collect()
}

/// Everything in the default registry plus the remaining computable columns.
pub fn extended_registry() -> Vec<FeatureId> {
    let mut ids = default_registry();
    ids.extend(
        [
            "cohesion.argument_overlap_adj",
            "cohesion.anaphor_overlap_all",
            "wordinfo.imageability_all",
            "wordinfo.log_freq_content",
            "incidence.pronoun_first_singular",
            "incidence.pronoun_first_plural",
            "incidence.pronoun_third_singular",
            "incidence.pronoun_possessive",
            "incidence.connectives",
            "incidence.connective_causal",
            "incidence.connective_additive",
            "incidence.connective_adversative",
            "incidence.connective_temporal",
            "liwc.modal",
            "liwc.negemo",
            "liwc.preposition",
            "liwc.conjunction",
            "liwc.determiner",
            "easability.pc_ref_cohesion_percentile",
            "easability.pc_connectivity_percentile",
        ]
        .into_iter()
        .map(FeatureId::from),
    );
    ids
}

/// Feature list plus LSA parameters; JSON-serializable for run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryConfig {
    pub features: Vec<FeatureId>,
    pub lsa_k: usize,
    pub lsa_seed: u64,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        RegistryConfig {
            features: default_registry(),
            lsa_k: 100,
            lsa_seed: 7,
        }
    }
}

/// Shared read-only inputs for extraction.
pub struct Resources<'a> {
    pub lexicon: &'a Lexicon,
    pub norms: &'a NormsTable,
    pub freqs: &'a FrequencyTable,
}

const REF_COHESION_CONSTITUENTS: [&str; 7] = [
    "cohesion.cw_overlap_adj",
    "cohesion.cw_overlap_all",
    "cohesion.noun_overlap_adj",
    "cohesion.noun_overlap_all",
    "cohesion.argument_overlap_all",
    "cohesion.anaphor_overlap_adj",
    "lsa.overlap_adj",
];
const CONNECTIVITY_CONSTITUENT: &str = "incidence.connectives";

fn is_easability(id: &FeatureId) -> bool {
    id.as_str().starts_with("easability.")
}

fn needs_lsa(id: &FeatureId) -> bool {
    id.as_str().starts_with("lsa.")
}

/// One base (non-easability) feature for one annotated document.
fn compute_base(
    doc: &PreparedDocument,
    id: &FeatureId,
    res: &Resources<'_>,
    space: Option<&LsaSpace>,
) -> Result<Option<f64>, FeatureError> {
    use IncidenceBasis::{Per1000Words, Percent};
    let pct_cat = |cat: &str| -> Result<Option<f64>, FeatureError> {
        incidence(doc, &CategoryId::new(cat), Percent).map(Some)
    };
    let per1000_cat = |cat: &str| -> Result<Option<f64>, FeatureError> {
        incidence(doc, &CategoryId::new(cat), Per1000Words).map(Some)
    };
    let overlap = |kind, scope| Ok(overlap_score(doc, kind, scope));
    let space = |id: &FeatureId| -> Result<&LsaSpace, FeatureError> {
        space.ok_or_else(|| FeatureError::MissingConstituent(id.clone()))
    };

    match id.as_str() {
        "cohesion.cw_overlap_adj" => overlap(OverlapKind::Content, PairScope::Adjacent),
        "cohesion.cw_overlap_all" => overlap(OverlapKind::Content, PairScope::All),
        "cohesion.noun_overlap_adj" => overlap(OverlapKind::Noun, PairScope::Adjacent),
        "cohesion.noun_overlap_all" => overlap(OverlapKind::Noun, PairScope::All),
        "cohesion.argument_overlap_adj" => overlap(OverlapKind::Argument, PairScope::Adjacent),
        "cohesion.argument_overlap_all" => overlap(OverlapKind::Argument, PairScope::All),
        "cohesion.anaphor_overlap_adj" => overlap(OverlapKind::Anaphor, PairScope::Adjacent),
        "cohesion.anaphor_overlap_all" => overlap(OverlapKind::Anaphor, PairScope::All),
        "lsa.overlap_adj" => Ok(lsa_overlap(doc, space(id)?, PairScope::Adjacent)),
        "lsa.overlap_all" => Ok(lsa_overlap(doc, space(id)?, PairScope::All)),
        "lsa.given_new" => Ok(lsa_given_new(doc, space(id)?)),
        "wordinfo.concreteness_all" => {
            Ok(norm_mean(doc, res.norms, NormField::Concreteness, TokenSubset::AllWords).0)
        }
        "wordinfo.concreteness_content" => {
            Ok(norm_mean(doc, res.norms, NormField::Concreteness, TokenSubset::ContentWords).0)
        }
        "wordinfo.imageability_all" => {
            Ok(norm_mean(doc, res.norms, NormField::Imageability, TokenSubset::AllWords).0)
        }
        "wordinfo.imageability_content" => {
            Ok(norm_mean(doc, res.norms, NormField::Imageability, TokenSubset::ContentWords).0)
        }
        "wordinfo.log_freq_all" => Ok(log_freq_mean(doc, res.freqs, TokenSubset::AllWords).0),
        "wordinfo.log_freq_content" => {
            Ok(log_freq_mean(doc, res.freqs, TokenSubset::ContentWords).0)
        }
        "incidence.pronoun_first_singular" => per1000_cat("pronoun.first_singular"),
        "incidence.pronoun_first_plural" => per1000_cat("pronoun.first_plural"),
        "incidence.pronoun_second" => per1000_cat("pronoun.second"),
        "incidence.pronoun_third_singular" => per1000_cat("pronoun.third_singular"),
        "incidence.pronoun_third_plural" => per1000_cat("pronoun.third_plural"),
        "incidence.pronoun_possessive" => per1000_cat("pronoun.possessive"),
        "incidence.connectives" => connectives_incidence(doc, Per1000Words).map(Some),
        "incidence.connective_causal" => per1000_cat("connective.causal"),
        "incidence.connective_additive" => per1000_cat("connective.additive"),
        "incidence.connective_adversative" => per1000_cat("connective.adversative"),
        "incidence.connective_temporal" => per1000_cat("connective.temporal"),
        "liwc.auxverb" => pct_cat("verb.aux"),
        "liwc.modal" => pct_cat("verb.modal"),
        "liwc.article" => pct_cat("article"),
        "liwc.preposition" => pct_cat("preposition"),
        "liwc.conjunction" => pct_cat("conjunction"),
        "liwc.determiner" => pct_cat("determiner"),
        "liwc.focuspast" => pct_cat("focus.past"),
        "liwc.focuspresent" => pct_cat("focus.present"),
        "liwc.focusfuture" => pct_cat("focus.future"),
        "liwc.posemo" => pct_cat("emotion.positive"),
        "liwc.negemo" => pct_cat("emotion.negative"),
        "liwc.cause" => pct_cat("cognition.cause"),
        "liwc.number" => pct_cat("number_word"),
        _ => Err(FeatureError::UnknownFeature(id.clone())),
    }
}

/// Extract the configured registry for an annotated corpus. Missing values
/// are imputed with column means; easability components are computed from the
/// imputed constituent columns. Deterministic given the config.
pub fn extract_matrix(
    corpus: &[PreparedDocument],
    config: &RegistryConfig,
    res: &Resources<'_>,
) -> Result<FeatureMatrix, FeatureError> {
    let wants_easability = config.features.iter().any(is_easability);
    let wants_ref = config
        .features
        .iter()
        .any(|f| f.as_str().starts_with("easability.pc_ref_cohesion"));
    let wants_conn = config
        .features
        .iter()
        .any(|f| f.as_str().starts_with("easability.pc_connectivity"));
    if wants_easability && corpus.len() < 2 {
        return Err(FeatureError::DegenerateCorpus(
            "easability components need at least two documents".into(),
        ));
    }

    // Internal columns: every requested base feature plus easability
    // constituents, deduplicated, in first-seen order.
    let mut internal: Vec<FeatureId> = Vec::new();
    let push = |id: FeatureId, internal: &mut Vec<FeatureId>| {
        if !internal.contains(&id) {
            internal.push(id);
        }
    };
    for f in &config.features {
        if !is_easability(f) {
            push(f.clone(), &mut internal);
        }
    }
    if wants_ref {
        for c in REF_COHESION_CONSTITUENTS {
            push(FeatureId::from(c), &mut internal);
        }
    }
    if wants_conn {
        push(FeatureId::from(CONNECTIVITY_CONSTITUENT), &mut internal);
    }

    let need_space = internal.iter().any(needs_lsa);
    let space = if need_space {
        Some(fit_lsa(corpus, config.lsa_k, config.lsa_seed)?)
    } else {
        None
    };

    let rows: Vec<Result<Vec<Option<f64>>, FeatureError>> = par::map_slice(corpus, |doc| {
        internal
            .iter()
            .map(|id| compute_base(doc, id, res, space.as_ref()))
            .collect()
    });
    let mut grid: Vec<Vec<Option<f64>>> = Vec::with_capacity(corpus.len());
    for row in rows {
        grid.push(row?);
    }

    // Column-mean imputation over the internal grid.
    let mut imputed_counts: BTreeMap<FeatureId, usize> = BTreeMap::new();
    for col in 0..internal.len() {
        let (mut sum, mut n) = (0.0, 0usize);
        for row in &grid {
            if let Some(v) = row[col] {
                sum += v;
                n += 1;
            }
        }
        let mean = if n > 0 { sum / n as f64 } else { 0.0 };
        let mut imputed = 0usize;
        for row in &mut grid {
            if row[col].is_none() {
                row[col] = Some(mean);
                imputed += 1;
            }
        }
        if imputed > 0 {
            imputed_counts.insert(internal[col].clone(), imputed);
        }
    }

    let dense_internal = |id: &str| -> Vec<f64> {
        let col = internal
            .iter()
            .position(|f| f.as_str() == id)
            .expect("internal column present");
        grid.iter().map(|row| row[col].unwrap()).collect()
    };

    let ref_z: Option<Vec<f64>> = wants_ref.then(|| {
        let z_cols: Vec<Vec<f64>> = REF_COHESION_CONSTITUENTS
            .iter()
            .map(|c| stats::zscores(&dense_internal(c)))
            .collect();
        (0..corpus.len())
            .map(|i| z_cols.iter().map(|col| col[i]).sum::<f64>() / z_cols.len() as f64)
            .collect()
    });
    let conn_z: Option<Vec<f64>> =
        wants_conn.then(|| stats::zscores(&dense_internal(CONNECTIVITY_CONSTITUENT)));

    let mut matrix = FeatureMatrix::new(
        corpus.iter().map(|d| d.id.clone()).collect(),
        corpus.iter().map(|d| d.label).collect(),
        config.features.clone(),
    );
    for (out_col, id) in config.features.iter().enumerate() {
        let column: Vec<f64> = match id.as_str() {
            "easability.pc_ref_cohesion_z" => ref_z.clone().expect("ref component computed"),
            "easability.pc_ref_cohesion_percentile" => ref_z
                .as_ref()
                .expect("ref component computed")
                .iter()
                .map(|z| 100.0 * stats::normal_cdf(*z))
                .collect(),
            "easability.pc_connectivity_z" => conn_z.clone().expect("connectivity computed"),
            "easability.pc_connectivity_percentile" => conn_z
                .as_ref()
                .expect("connectivity computed")
                .iter()
                .map(|z| 100.0 * stats::normal_cdf(*z))
                .collect(),
            other if other.starts_with("easability.") => {
                return Err(FeatureError::UnknownFeature(id.clone()));
            }
            _ => dense_internal(id.as_str()),
        };
        for (row, v) in column.into_iter().enumerate() {
            matrix.values[row][out_col] = Some(v);
        }
    }

    imputed_counts.retain(|id, _| config.features.contains(id));
    matrix.meta = MatrixMeta {
        imputed_cells: imputed_counts,
        lsa_k: config.lsa_k,
        lsa_rank: space.as_ref().map(|s| s.k).unwrap_or(0),
        lsa_seed: config.lsa_seed,
    };
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{annotate, prepare_document, CleanRuleSet, RawDocument};

    fn resources() -> (Lexicon, NormsTable, FrequencyTable) {
        let lex = Lexicon::parse_str(include_str!("../../assets/lexicon.tsv")).unwrap();
        let norms = NormsTable::load(
            Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/norms.csv")),
            (1.0, 7.0),
        )
        .unwrap();
        let freqs = FrequencyTable::load(Path::new(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/assets/frequencies.csv"
        )))
        .unwrap();
        (lex, norms, freqs)
    }

    fn corpus(texts: &[&str]) -> Vec<PreparedDocument> {
        let (lex, _, _) = resources();
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let raw = RawDocument {
                    id: format!("{i:03}_doc"),
                    label: if i % 2 == 0 { Label::High } else { Label::Moderate },
                    text: (*t).into(),
                    source_path: String::new(),
                };
                annotate(prepare_document(&raw, &CleanRuleSet::default_rules()), &lex).unwrap()
            })
            .collect()
    }

    const TEXTS: [&str; 4] = [
        "The virus spread through the city. The virus reached many patients. They needed care soon.",
        "Masks helped the people. The people improved because masks worked. Therefore the outcome was good.",
        "The trial reported strong results. The cohort was large. It confirmed the effect.",
        "One sentence only.",
    ];

    #[test]
    fn default_registry_has_twenty_five_columns() {
        assert_eq!(default_registry().len(), 25);
        let ids = default_registry();
        let mut dedup = ids.clone();
        dedup.dedup();
        assert_eq!(ids.len(), dedup.len());
    }

    #[test]
    fn extracts_dense_matrix_with_imputation() {
        let docs = corpus(&TEXTS);
        let (lex, norms, freqs) = resources();
        let res = Resources {
            lexicon: &lex,
            norms: &norms,
            freqs: &freqs,
        };
        let cfg = RegistryConfig {
            lsa_k: 10,
            ..RegistryConfig::default()
        };
        let m = extract_matrix(&docs, &cfg, &res).unwrap();
        assert_eq!(m.n_docs(), 4);
        assert_eq!(m.n_features(), 25);
        assert!(m.dense_rows().is_ok(), "no missing cells after imputation");
        // Doc 3 is single-sentence: its overlap columns were imputed.
        let col = m.feature_index(&FeatureId::from("cohesion.cw_overlap_adj")).unwrap();
        assert!(m.meta.imputed_cells[&m.features[col]] >= 1);
        // Imputed cell equals the mean of the other docs' values.
        let vals = m.dense_column(col).unwrap();
        let mean = (vals[0] + vals[1] + vals[2]) / 3.0;
        assert!((vals[3] - mean).abs() < 1e-12);
    }

    #[test]
    fn extraction_is_deterministic() {
        let docs = corpus(&TEXTS);
        let (lex, norms, freqs) = resources();
        let res = Resources {
            lexicon: &lex,
            norms: &norms,
            freqs: &freqs,
        };
        let cfg = RegistryConfig::default();
        let a = extract_matrix(&docs, &cfg, &res).unwrap();
        let b = extract_matrix(&docs, &cfg, &res).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn permuting_documents_permutes_rows_only() {
        let docs = corpus(&TEXTS);
        let (lex, norms, freqs) = resources();
        let res = Resources {
            lexicon: &lex,
            norms: &norms,
            freqs: &freqs,
        };
        let cfg = RegistryConfig::default();
        let a = extract_matrix(&docs, &cfg, &res).unwrap();
        let mut shuffled: Vec<PreparedDocument> = docs.clone();
        shuffled.rotate_left(2);
        let b = extract_matrix(&shuffled, &cfg, &res).unwrap();
        for (i, id) in a.doc_ids.iter().enumerate() {
            let j = b.doc_ids.iter().position(|d| d == id).unwrap();
            for c in 0..a.n_features() {
                let (x, y) = (a.values[i][c].unwrap(), b.values[j][c].unwrap());
                // Semantic-space columns go through an iterative eigensolver
                // whose path depends on sentence order, so they agree only to
                // solver accuracy. Everything else is exact arithmetic.
                let name = a.features[c].as_str();
                let tol = if name.starts_with("lsa.") || name.starts_with("easability.") {
                    1e-6
                } else {
                    1e-12
                };
                assert!((x - y).abs() < tol, "{id} col {c} ({name}): {x} vs {y}");
            }
        }
    }

    #[test]
    fn csv_round_trip_preserves_grid() {
        let docs = corpus(&TEXTS);
        let (lex, norms, freqs) = resources();
        let res = Resources {
            lexicon: &lex,
            norms: &norms,
            freqs: &freqs,
        };
        let m = extract_matrix(&docs, &RegistryConfig::default(), &res).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        m.write_csv(&path).unwrap();
        let back = FeatureMatrix::read_csv(&path).unwrap();
        assert_eq!(back.doc_ids, m.doc_ids);
        assert_eq!(back.labels, m.labels);
        assert_eq!(back.features, m.features);
        for (ra, rb) in m.values.iter().zip(&back.values) {
            for (a, b) in ra.iter().zip(rb) {
                assert_eq!(a, b, "shortest round-trip formatting must be exact");
            }
        }
    }

    #[test]
    fn missing_cells_survive_csv_round_trip() {
        let mut m = FeatureMatrix::new(
            vec!["a".into(), "b".into()],
            vec![Label::High, Label::Moderate],
            vec![FeatureId::from("x"), FeatureId::from("y")],
        );
        m.values[0][0] = Some(1.5);
        m.values[1][1] = Some(-2.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partial.csv");
        m.write_csv(&path).unwrap();
        let back = FeatureMatrix::read_csv(&path).unwrap();
        assert_eq!(back.values[0], vec![Some(1.5), None]);
        assert_eq!(back.values[1], vec![None, Some(-2.0)]);
    }

    #[test]
    fn unknown_feature_is_an_error() {
        let docs = corpus(&TEXTS[..2]);
        let (lex, norms, freqs) = resources();
        let res = Resources {
            lexicon: &lex,
            norms: &norms,
            freqs: &freqs,
        };
        let cfg = RegistryConfig {
            features: vec![FeatureId::from("nope.bogus")],
            lsa_k: 5,
            lsa_seed: 7,
        };
        assert!(matches!(
            extract_matrix(&docs, &cfg, &res),
            Err(FeatureError::UnknownFeature(_))
        ));
    }

    #[test]
    fn extended_registry_extracts_cleanly() {
        let docs = corpus(&TEXTS);
        let (lex, norms, freqs) = resources();
        let res = Resources {
            lexicon: &lex,
            norms: &norms,
            freqs: &freqs,
        };
        let cfg = RegistryConfig {
            features: extended_registry(),
            lsa_k: 10,
            lsa_seed: 7,
        };
        let m = extract_matrix(&docs, &cfg, &res).unwrap();
        assert_eq!(m.n_features(), extended_registry().len());
        assert!(m.dense_rows().is_ok());
        // Percentile columns live in [0, 100].
        let pc = m
            .feature_index(&FeatureId::from("easability.pc_ref_cohesion_percentile"))
            .unwrap();
        for v in m.dense_column(pc).unwrap() {
            assert!((0.0..=100.0).contains(&v));
        }
    }

}
