//! Labeled raw texts, cleaning, sentence segmentation, tokenization, and
//! lexical annotation.

mod clean;
mod manifest;
mod segment;
mod tokenize;

pub use clean::{clean, CleanRule, CleanRuleSet};
pub use manifest::load_corpus;
pub use segment::segment;
pub use tokenize::{stem, tokenize, Token, TokenKind};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicons::{CategoryId, Lexicon};

/// Binary document class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "HIGH")]
    High,
    #[serde(rename = "MODERATE")]
    Moderate,
}

impl Label {
    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HIGH" => Some(Label::High),
            "MODERATE" => Some(Label::Moderate),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::High => "HIGH",
            Label::Moderate => "MODERATE",
        }
    }

    pub fn other(&self) -> Label {
        match self {
            Label::High => Label::Moderate,
            Label::Moderate => Label::High,
        }
    }

    /// Fixed slot in two-element count arrays: HIGH 0, MODERATE 1.
    pub fn index(&self) -> usize {
        match self {
            Label::High => 0,
            Label::Moderate => 1,
        }
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::High
        } else {
            Label::Moderate
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("manifest io: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest parse: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest header must be `path,label`, got `{0}`")]
    BadHeader(String),
    #[error("document file missing: {0}")]
    MissingFile(String),
    #[error("bad label `{value}` in manifest row {row} (expected HIGH or MODERATE)")]
    BadLabel { row: u64, value: String },
    #[error("duplicate document id: {0}")]
    DuplicateId(String),
    #[error("required lexicon category missing: {0}")]
    LexiconMissing(String),
}

/// A labeled document as loaded from disk, before any processing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub label: Label,
    pub text: String,
    pub source_path: String,
}

/// One sentence, tokenized. `text` is the cleaned sentence string the token
/// offsets refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<Token>,
}

/// A cleaned, segmented, tokenized document ready for feature extraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreparedDocument {
    pub id: String,
    pub label: Label,
    pub sentences: Vec<Sentence>,
}

/// Clean, segment, and tokenize one raw document. Annotation (categories,
/// content flags, noun candidates) is a separate pass, see [`annotate`].
pub fn prepare_document(raw: &RawDocument, rules: &CleanRuleSet) -> PreparedDocument {
    let cleaned = clean(&raw.text, rules);
    let sentences = segment(&cleaned)
        .into_iter()
        .map(|s| {
            let tokens = tokenize(&s);
            Sentence { text: s, tokens }
        })
        .collect();
    PreparedDocument {
        id: raw.id.clone(),
        label: raw.label,
        sentences,
    }
}

/// Category namespaces that mark a word as a function word; everything else
/// counts as a content word.
const FUNCTION_NAMESPACES: &[&str] = &[
    "article",
    "determiner",
    "preposition",
    "conjunction",
    "pronoun",
    "verb.aux",
    "verb.modal",
    "connective",
];

/// Closed-class lists that must be present before annotation makes sense.
const REQUIRED_CATEGORIES: &[&str] = &[
    "article",
    "determiner",
    "preposition",
    "conjunction",
    "verb.aux",
];

const NOUN_SUFFIXES: &[&str] = &[
    "tion", "ment", "ity", "ness", "ism", "ance", "ence", "ology",
];

fn in_namespace(id: &CategoryId, ns: &str) -> bool {
    let s = id.as_str();
    s == ns || (s.len() > ns.len() && s.starts_with(ns) && s.as_bytes()[ns.len()] == b'.')
}

fn is_function_category(id: &CategoryId) -> bool {
    FUNCTION_NAMESPACES.iter().any(|ns| in_namespace(id, ns))
}

/// Attach lexicon categories to every token, set the content/function flag,
/// and mark noun candidates.
///
/// Noun candidates are content words that follow a determiner or possessive,
/// are capitalized mid-sentence, or carry a nominal suffix on their stem.
pub fn annotate(mut doc: PreparedDocument, lex: &Lexicon) -> Result<PreparedDocument, CorpusError> {
    for required in REQUIRED_CATEGORIES {
        if !lex.has_category(required) {
            return Err(CorpusError::LexiconMissing((*required).to_string()));
        }
    }
    if !lex.category_ids().any(|id| in_namespace(id, "pronoun")) {
        return Err(CorpusError::LexiconMissing("pronoun.*".to_string()));
    }

    for sentence in &mut doc.sentences {
        let mut prev_is_det = false;
        for (idx, token) in sentence.tokens.iter_mut().enumerate() {
            token.categories = match token.kind {
                TokenKind::Word => lex.match_categories(&token.lower),
                TokenKind::Number => {
                    let mut set = BTreeSet::new();
                    set.insert(CategoryId::new("number_word"));
                    set
                }
                TokenKind::Punct => BTreeSet::new(),
            };
            token.is_content = token.kind == TokenKind::Word
                && !token.categories.iter().any(is_function_category);

            let after_determiner = prev_is_det;
            prev_is_det = token.categories.iter().any(|c| {
                in_namespace(c, "article")
                    || in_namespace(c, "determiner")
                    || c.as_str() == "pronoun.possessive"
            });

            let capitalized_mid = idx > 0
                && token
                    .surface
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_uppercase());
            let nominal_suffix = NOUN_SUFFIXES.iter().any(|s| token.stem.ends_with(s));
            token.is_noun_candidate =
                token.is_content && (after_determiner || capitalized_mid || nominal_suffix);
        }
    }
    Ok(doc)
}

impl Token {
    pub fn has_category(&self, id: &str) -> bool {
        self.categories.iter().any(|c| c.as_str() == id)
    }

    pub fn in_category_namespace(&self, ns: &str) -> bool {
        self.categories.iter().any(|c| in_namespace(c, ns))
    }

    /// Third-person pronoun (singular or plural), used by anaphor overlap.
    pub fn is_third_person_pronoun(&self) -> bool {
        self.in_category_namespace("pronoun.third_singular")
            || self.in_category_namespace("pronoun.third_plural")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicons::Lexicon;

    fn demo_lexicon() -> Lexicon {
        Lexicon::parse_str(include_str!("../../assets/lexicon.tsv")).unwrap()
    }

    #[test]
    fn annotate_marks_content_and_noun_candidates() {
        let raw = RawDocument {
            id: "t".into(),
            label: Label::High,
            text: "the virus spread".into(),
            source_path: String::new(),
        };
        let doc = prepare_document(&raw, &CleanRuleSet::default_rules());
        let doc = annotate(doc, &demo_lexicon()).unwrap();
        let toks = &doc.sentences[0].tokens;
        assert!(!toks[0].is_content, "`the` is a function word");
        assert!(toks[1].is_content && toks[2].is_content);
        assert!(toks[1].is_noun_candidate, "`virus` follows a determiner");
        assert!(!toks[2].is_noun_candidate);
    }

    #[test]
    fn annotate_flags_third_person_plural() {
        let raw = RawDocument {
            id: "t".into(),
            label: Label::High,
            text: "They arrived.".into(),
            source_path: String::new(),
        };
        let doc = prepare_document(&raw, &CleanRuleSet::default_rules());
        let doc = annotate(doc, &demo_lexicon()).unwrap();
        let they = &doc.sentences[0].tokens[0];
        assert!(they.has_category("pronoun.third_plural"));
        assert!(!they.is_content);
    }

    #[test]
    fn annotate_all_punct_sentence_is_fine() {
        let doc = PreparedDocument {
            id: "t".into(),
            label: Label::Moderate,
            sentences: vec![Sentence {
                text: "—— ?? !".into(),
                tokens: tokenize("; ; !"),
            }],
        };
        let doc = annotate(doc, &demo_lexicon()).unwrap();
        assert!(doc.sentences[0].tokens.iter().all(|t| !t.is_content));
    }

    #[test]
    fn word_tokens_are_content_xor_function() {
        let raw = RawDocument {
            id: "t".into(),
            label: Label::High,
            text: "The patients were treated because they needed effective care in 2020.".into(),
            source_path: String::new(),
        };
        let doc = prepare_document(&raw, &CleanRuleSet::default_rules());
        let doc = annotate(doc, &demo_lexicon()).unwrap();
        for tok in doc.sentences.iter().flat_map(|s| &s.tokens) {
            match tok.kind {
                TokenKind::Word => {
                    let function = tok.categories.iter().any(is_function_category);
                    assert!(tok.is_content ^ function, "token {:?}", tok.surface);
                }
                _ => assert!(!tok.is_content),
            }
        }
    }
}
