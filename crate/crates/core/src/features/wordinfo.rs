//! Token-level features: category incidences, psycholinguistic norm means,
//! and log-frequency means.

use serde::{Deserialize, Serialize};

use crate::corpus::{PreparedDocument, TokenKind};
use crate::features::FeatureError;
use crate::lexicons::{CategoryId, FrequencyTable, NormsTable};

/// Incidence denominators and multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncidenceBasis {
    Per1000Words,
    Percent,
}

impl IncidenceBasis {
    fn multiplier(self) -> f64 {
        match self {
            IncidenceBasis::Per1000Words => 1000.0,
            IncidenceBasis::Percent => 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormField {
    Concreteness,
    Imageability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenSubset {
    AllWords,
    ContentWords,
}

fn countable(kind: TokenKind) -> bool {
    matches!(kind, TokenKind::Word | TokenKind::Number)
}

fn word_token_count(doc: &PreparedDocument) -> usize {
    doc.sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .filter(|t| countable(t.kind))
        .count()
}

fn incidence_by(
    doc: &PreparedDocument,
    basis: IncidenceBasis,
    hit: impl Fn(&crate::corpus::Token) -> bool,
) -> Result<f64, FeatureError> {
    let total = word_token_count(doc);
    if total == 0 {
        return Err(FeatureError::EmptyDocument(doc.id.clone()));
    }
    let hits = doc
        .sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .filter(|t| countable(t.kind) && hit(t))
        .count();
    Ok(hits as f64 / total as f64 * basis.multiplier())
}

/// Tokens carrying `category`, relative to all Word and Number tokens.
pub fn incidence(
    doc: &PreparedDocument,
    category: &CategoryId,
    basis: IncidenceBasis,
) -> Result<f64, FeatureError> {
    incidence_by(doc, basis, |t| t.categories.contains(category))
}

/// Tokens carrying any `connective.*` category; a token with several
/// connective categories counts once.
pub fn connectives_incidence(
    doc: &PreparedDocument,
    basis: IncidenceBasis,
) -> Result<f64, FeatureError> {
    incidence_by(doc, basis, |t| t.in_category_namespace("connective"))
}

fn subset_tokens<'a>(
    doc: &'a PreparedDocument,
    subset: TokenSubset,
) -> impl Iterator<Item = &'a crate::corpus::Token> {
    doc.sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .filter(move |t| match subset {
            TokenSubset::AllWords => t.kind == TokenKind::Word,
            TokenSubset::ContentWords => t.is_content,
        })
}

fn mean_over(
    doc: &PreparedDocument,
    subset: TokenSubset,
    value: impl Fn(&str) -> Option<f64>,
) -> (Option<f64>, f64) {
    let mut total = 0usize;
    let mut covered = 0usize;
    let mut sum = 0.0;
    for t in subset_tokens(doc, subset) {
        total += 1;
        if let Some(v) = value(&t.lower) {
            covered += 1;
            sum += v;
        }
    }
    if total == 0 || covered == 0 {
        return (None, 0.0);
    }
    (Some(sum / covered as f64), covered as f64 / total as f64)
}

/// Mean norm rating over covered tokens plus the covered fraction. An empty
/// subset or zero coverage yields `(None, 0.0)`.
pub fn norm_mean(
    doc: &PreparedDocument,
    norms: &NormsTable,
    field: NormField,
    subset: TokenSubset,
) -> (Option<f64>, f64) {
    mean_over(doc, subset, |w| {
        norms.get(w).map(|(conc, imag)| match field {
            NormField::Concreteness => conc,
            NormField::Imageability => imag,
        })
    })
}

/// Mean base-10 log frequency over covered tokens plus coverage.
pub fn log_freq_mean(
    doc: &PreparedDocument,
    freqs: &FrequencyTable,
    subset: TokenSubset,
) -> (Option<f64>, f64) {
    mean_over(doc, subset, |w| freqs.log_freq(w))
}
