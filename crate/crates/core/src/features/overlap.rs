//! Sentence-pair cohesion overlaps. Documents must be annotated first so
//! content flags and noun candidates are populated.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{PreparedDocument, Sentence, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverlapKind {
    Content,
    Noun,
    Argument,
    Anaphor,
}

/// Which sentence pairs participate: consecutive only, or all unordered pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairScope {
    Adjacent,
    All,
}

fn content_stems(s: &Sentence) -> BTreeSet<&str> {
    s.tokens
        .iter()
        .filter(|t| t.is_content && t.kind == TokenKind::Word)
        .map(|t| t.stem.as_str())
        .collect()
}

fn noun_stems(s: &Sentence) -> BTreeSet<&str> {
    s.tokens
        .iter()
        .filter(|t| t.is_noun_candidate)
        .map(|t| t.stem.as_str())
        .collect()
}

fn pronoun_forms(s: &Sentence) -> BTreeSet<&str> {
    s.tokens
        .iter()
        .filter(|t| t.in_category_namespace("pronoun"))
        .map(|t| t.lower.as_str())
        .collect()
}

fn dice(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let shared = a.intersection(b).count();
    2.0 * shared as f64 / (a.len() + b.len()) as f64
}

fn pair_score(kind: OverlapKind, earlier: &Sentence, later: &Sentence) -> f64 {
    match kind {
        OverlapKind::Content => dice(&content_stems(earlier), &content_stems(later)),
        OverlapKind::Noun => {
            let shared = !noun_stems(earlier).is_disjoint(&noun_stems(later));
            shared as u8 as f64
        }
        OverlapKind::Argument => {
            let nouns = !noun_stems(earlier).is_disjoint(&noun_stems(later));
            let pronouns = !pronoun_forms(earlier).is_disjoint(&pronoun_forms(later));
            (nouns || pronouns) as u8 as f64
        }
        OverlapKind::Anaphor => {
            let has_pronoun = later.tokens.iter().any(|t| t.is_third_person_pronoun());
            let has_antecedent = earlier.tokens.iter().any(|t| t.is_noun_candidate);
            (has_pronoun && has_antecedent) as u8 as f64
        }
    }
}

/// Mean pair overlap in `[0, 1]`, or `None` for documents with fewer than two
/// sentences.
pub fn overlap_score(doc: &PreparedDocument, kind: OverlapKind, scope: PairScope) -> Option<f64> {
    let sents = &doc.sentences;
    if sents.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    match scope {
        PairScope::Adjacent => {
            for w in sents.windows(2) {
                total += pair_score(kind, &w[0], &w[1]);
                pairs += 1;
            }
        }
        PairScope::All => {
            for i in 0..sents.len() {
                for j in i + 1..sents.len() {
                    total += pair_score(kind, &sents[i], &sents[j]);
                    pairs += 1;
                }
            }
        }
    }
    Some(total / pairs as f64)
}
