//! Regex-driven text cleaning, applied before segmentation.

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("clean rule `{id}`: {source}")]
pub struct CleanRuleError {
    pub id: String,
    #[source]
    pub source: regex::Error,
}

/// One substitution: `pattern` is a regex, applied with `replace_all`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CleanRule {
    pub id: String,
    pub pattern: String,
    pub replacement: String,
}

/// Ordered list of [`CleanRule`]s. Rules run in declaration order, then all
/// whitespace runs collapse to single spaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<CleanRule>", into = "Vec<CleanRule>")]
pub struct CleanRuleSet {
    rules: Vec<CleanRule>,
    compiled: Vec<Regex>,
}

impl CleanRuleSet {
    pub fn new(rules: Vec<CleanRule>) -> Result<Self, CleanRuleError> {
        let compiled = rules
            .iter()
            .map(|r| {
                Regex::new(&r.pattern).map_err(|source| CleanRuleError {
                    id: r.id.clone(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CleanRuleSet { rules, compiled })
    }

    /// Rules for research-article prose: drops author-year citations,
    /// bracketed reference numbers, figure and table caption lines, and
    /// non-ASCII runs.
    pub fn default_rules() -> Self {
        let rule = |id: &str, pattern: &str, replacement: &str| CleanRule {
            id: id.to_string(),
            pattern: pattern.to_string(),
            replacement: replacement.to_string(),
        };
        CleanRuleSet::new(vec![
            rule(
                "caption-line",
                r"(?m)^[ \t]*(?:Figure|Table|Fig\.?)\s*\d+[.:][^\n]*$",
                "",
            ),
            rule(
                "citation-author-year",
                r"\([^()]*\b(?:19|20)\d{2}[a-z]?[^()]*\)",
                "",
            ),
            rule(
                "citation-bracketed",
                r"\[\s*\d+(?:\s*[,;\-]\s*\d+)*\s*\]",
                "",
            ),
            rule("non-ascii", r"[^\x00-\x7F]+", " "),
        ])
        .expect("default rules compile")
    }

    pub fn rules(&self) -> &[CleanRule] {
        &self.rules
    }
}

impl TryFrom<Vec<CleanRule>> for CleanRuleSet {
    type Error = CleanRuleError;

    fn try_from(rules: Vec<CleanRule>) -> Result<Self, Self::Error> {
        CleanRuleSet::new(rules)
    }
}

impl From<CleanRuleSet> for Vec<CleanRule> {
    fn from(set: CleanRuleSet) -> Self {
        set.rules
    }
}

/// Apply every rule in order, then collapse whitespace. Idempotent for the
/// default rules: cleaning a cleaned text is a no-op.
pub fn clean(text: &str, rules: &CleanRuleSet) -> String {
    let mut out = text.to_string();
    for (rule, re) in rules.rules.iter().zip(&rules.compiled) {
        out = re.replace_all(&out, rule.replacement.as_str()).into_owned();
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_clean(text: &str) -> String {
        clean(text, &CleanRuleSet::default_rules())
    }

    #[test]
    fn removes_author_year_citations() {
        assert_eq!(
            default_clean("Prior work (Smith, 2019) shows X."),
            "Prior work shows X."
        );
        assert_eq!(
            default_clean("Results hold (see Lee et al., 2020a; Kim, 2021)."),
            "Results hold ."
        );
    }

    #[test]
    fn keeps_non_citation_parentheticals() {
        assert_eq!(
            default_clean("The model (a random forest) worked."),
            "The model (a random forest) worked."
        );
    }

    #[test]
    fn removes_bracketed_reference_numbers() {
        assert_eq!(
            default_clean("As shown [1] and later [2, 3-5]."),
            "As shown and later ."
        );
        assert_eq!(default_clean("array[i] stays"), "array[i] stays");
    }

    #[test]
    fn removes_caption_lines() {
        let text = "Intro text.\nTable 2: Accuracy by model\nMore text.";
        assert_eq!(default_clean(text), "Intro text. More text.");
    }

    #[test]
    fn replaces_non_ascii_runs() {
        assert_eq!(default_clean("alpha \u{3b1}\u{3b2} beta"), "alpha beta");
        assert_eq!(default_clean("em\u{2014}dash"), "em dash");
    }

    #[test]
    fn collapses_whitespace() {
        assert_eq!(default_clean("a\t b\n\nc"), "a b c");
    }

    #[test]
    fn empty_rules_only_collapse() {
        let none = CleanRuleSet::new(vec![]).unwrap();
        assert_eq!(clean(" a  b ", &none), "a b");
    }

    #[test]
    fn bad_pattern_is_rejected() {
        let err = CleanRuleSet::new(vec![CleanRule {
            id: "broken".into(),
            pattern: "(".into(),
            replacement: String::new(),
        }]);
        assert!(err.is_err());
    }

    #[test]
    fn ruleset_round_trips_through_json() {
        let set = CleanRuleSet::default_rules();
        let json = serde_json::to_string(&set).unwrap();
        let back: CleanRuleSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rules().len(), set.rules().len());
        assert_eq!(default_clean("x (Smith, 2019)"), clean("x (Smith, 2019)", &back));
    }

    #[test]
    fn default_rules_are_idempotent_on_tricky_text() {
        let text = "Nested (a (Smith, 2020) b) case.\nFig. 3: caption\n\u{2019}quoted\u{2019} [12].";
        let once = default_clean(text);
        assert_eq!(default_clean(&once), once);
    }
}
