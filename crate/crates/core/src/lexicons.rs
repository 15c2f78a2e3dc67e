//! Word lists: category lexicons (exact and prefix patterns), psycholinguistic
//! norms, and word frequencies.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dotted category identifier, e.g. `pronoun.third_plural` or `emotion.positive`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(String);

impl CategoryId {
    pub fn new(id: impl Into<String>) -> Self {
        CategoryId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CategoryId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon io: {0}")]
    Io(#[from] std::io::Error),
    #[error("lexicon csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unknown category `{category}`")]
    UnknownCategory { line: usize, category: String },
    #[error("line {line}: duplicate pattern `{pattern}`")]
    DuplicatePattern { line: usize, pattern: String },
    #[error("line {line}: value {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        line: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

/// Category lexicon. Patterns are lowercase literals, or prefixes written
/// with a trailing `*`. A literal match beats any prefix; among prefixes the
/// longest one wins.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Lexicon {
    categories: BTreeMap<CategoryId, String>,
    literals: BTreeMap<String, BTreeSet<CategoryId>>,
    prefixes: BTreeMap<String, BTreeSet<CategoryId>>,
}

impl Lexicon {
    /// Parse the TSV format:
    ///
    /// ```text
    /// % article<TAB>Articles
    /// the<TAB>article
    /// immun*<TAB>topic.health
    /// ```
    ///
    /// `%` lines declare categories; data lines map a pattern to a
    /// comma-separated category list. Blank lines and `#` comments are
    /// skipped.
    pub fn parse_str(contents: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::default();
        for (i, raw_line) in contents.lines().enumerate() {
            let line_no = i + 1;
            let line = raw_line.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(decl) = trimmed.strip_prefix('%') {
                let decl = decl.trim_start();
                let (id, name) = decl.split_once('\t').ok_or(LexiconError::Malformed {
                    line: line_no,
                    reason: "category line needs `id<TAB>name`".into(),
                })?;
                let id = id.trim();
                if id.is_empty() {
                    return Err(LexiconError::Malformed {
                        line: line_no,
                        reason: "empty category id".into(),
                    });
                }
                lex.categories
                    .insert(CategoryId::new(id), name.trim().to_string());
                continue;
            }
            let (pattern, cats) = line.split_once('\t').ok_or(LexiconError::Malformed {
                line: line_no,
                reason: "entry needs `pattern<TAB>categories`".into(),
            })?;
            let pattern = pattern.trim();
            if pattern.is_empty() || pattern == "*" {
                return Err(LexiconError::Malformed {
                    line: line_no,
                    reason: "empty pattern".into(),
                });
            }
            let mut set = BTreeSet::new();
            for cat in cats.split(',') {
                let cat = cat.trim();
                if cat.is_empty() {
                    continue;
                }
                let id = CategoryId::new(cat);
                if !lex.categories.contains_key(&id) {
                    return Err(LexiconError::UnknownCategory {
                        line: line_no,
                        category: cat.to_string(),
                    });
                }
                set.insert(id);
            }
            if set.is_empty() {
                return Err(LexiconError::Malformed {
                    line: line_no,
                    reason: "entry has no categories".into(),
                });
            }
            let target = if let Some(stemmed) = pattern.strip_suffix('*') {
                (&mut lex.prefixes, stemmed.to_lowercase())
            } else {
                (&mut lex.literals, pattern.to_lowercase())
            };
            if target.0.contains_key(&target.1) {
                return Err(LexiconError::DuplicatePattern {
                    line: line_no,
                    pattern: pattern.to_string(),
                });
            }
            target.0.insert(target.1, set);
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Lexicon, LexiconError> {
        Lexicon::parse_str(&fs::read_to_string(path)?)
    }

    /// Categories of the best-matching pattern for a lowercased word, or the
    /// empty set. Literal beats prefix; longest prefix beats shorter.
    pub fn match_categories(&self, word: &str) -> BTreeSet<CategoryId> {
        if let Some(cats) = self.literals.get(word) {
            return cats.clone();
        }
        let indices: Vec<usize> = word.char_indices().map(|(i, _)| i).collect();
        for &i in indices.iter().rev() {
            let prefix = &word[..i + word[i..].chars().next().map_or(0, char::len_utf8)];
            if let Some(cats) = self.prefixes.get(prefix) {
                return cats.clone();
            }
        }
        BTreeSet::new()
    }

    pub fn has_category(&self, id: &str) -> bool {
        self.categories.contains_key(&CategoryId::new(id))
    }

    pub fn category_ids(&self) -> impl Iterator<Item = &CategoryId> {
        self.categories.keys()
    }

    pub fn category_name(&self, id: &CategoryId) -> Option<&str> {
        self.categories.get(id).map(String::as_str)
    }

    pub fn entry_count(&self) -> usize {
        self.literals.len() + self.prefixes.len()
    }
}

/// Per-word concreteness and imageability ratings on a fixed scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormsTable {
    entries: BTreeMap<String, (f64, f64)>,
    lo: f64,
    hi: f64,
}

impl NormsTable {
    /// CSV with header `word,concreteness,imageability`. Every value must lie
    /// in `bounds`.
    pub fn load(path: &Path, bounds: (f64, f64)) -> Result<NormsTable, LexiconError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_open_error)?;
        let (lo, hi) = bounds;
        let mut entries = BTreeMap::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record?;
            let line = idx + 2;
            let word = record.get(0).unwrap_or("").to_lowercase();
            let parse = |field: Option<&str>| -> Result<f64, LexiconError> {
                field
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or(LexiconError::Malformed {
                        line,
                        reason: "expected numeric rating".into(),
                    })
            };
            let conc = parse(record.get(1))?;
            let imag = parse(record.get(2))?;
            for value in [conc, imag] {
                if !(lo..=hi).contains(&value) {
                    return Err(LexiconError::OutOfBounds { line, value, lo, hi });
                }
            }
            entries.insert(word, (conc, imag));
        }
        Ok(NormsTable { entries, lo, hi })
    }

    /// `(concreteness, imageability)` for a lowercased word.
    pub fn get(&self, word: &str) -> Option<(f64, f64)> {
        self.entries.get(word).copied()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Corpus frequencies per million tokens.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyTable {
    entries: BTreeMap<String, f64>,
}

impl FrequencyTable {
    /// CSV with header `word,freq_per_million`; frequencies must be positive.
    pub fn load(path: &Path) -> Result<FrequencyTable, LexiconError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_open_error)?;
        let mut entries = BTreeMap::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record?;
            let line = idx + 2;
            let word = record.get(0).unwrap_or("").to_lowercase();
            let freq: f64 = record
                .get(1)
                .and_then(|v| v.parse().ok())
                .ok_or(LexiconError::Malformed {
                    line,
                    reason: "expected numeric frequency".into(),
                })?;
            if !(freq > 0.0) {
                return Err(LexiconError::OutOfBounds {
                    line,
                    value: freq,
                    lo: f64::MIN_POSITIVE,
                    hi: f64::INFINITY,
                });
            }
            entries.insert(word, freq);
        }
        Ok(FrequencyTable { entries })
    }

    /// Base-10 log frequency for a lowercased word.
    pub fn log_freq(&self, word: &str) -> Option<f64> {
        self.entries.get(word).map(|f| f.log10())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn csv_open_error(e: csv::Error) -> LexiconError {
    match e.kind() {
        csv::ErrorKind::Io(_) => LexiconError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            e.to_string(),
        )),
        _ => LexiconError::Csv(e),
    }
}
