//! Synthetic corpus generation for end-to-end runs without real data.
//!
//! Documents are assembled from small hand-picked word pools that route
//! through the real cleaning, annotation, and extraction path, so class
//! differences surface only as measured features. Eight columns carry
//! planted signal (see [`PLANTED_FEATURES`]): five monotone shifts (past
//! focus, positive emotion, number words, and noun overlap up in HIGH;
//! future focus and third-person-plural pronouns up in MODERATE) and two
//! band effects (cause-word rate and sentence-to-sentence vocabulary reuse
//! sit mid-range in HIGH but at the extremes in MODERATE), which monotone
//! scorers underrate and linear models cannot express.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Label, RawDocument};
use crate::rng::{derive_seed, seeded};

/// Feature ids the generator deliberately separates by class.
pub const PLANTED_FEATURES: [&str; 8] = [
    "cohesion.noun_overlap_all",
    "incidence.pronoun_third_plural",
    "liwc.cause",
    "liwc.focusfuture",
    "liwc.focuspast",
    "liwc.number",
    "liwc.posemo",
    "lsa.given_new",
];

/// Subject and object nouns. All appear after determiners, so every one is a
/// noun candidate regardless of its suffix.
const TOPICS: [&str; 24] = [
    "antibody",
    "cohort",
    "droplet",
    "enzyme",
    "genome",
    "hospital",
    "immunity",
    "infection",
    "laboratory",
    "outbreak",
    "pandemic",
    "patient",
    "pathogen",
    "protein",
    "quarantine",
    "receptor",
    "sample",
    "strain",
    "symptom",
    "therapy",
    "tissue",
    "treatment",
    "vaccine",
    "virus",
];

/// Past-tense main verbs; every one is in the past-focus category and
/// nothing else.
const PAST_VERBS: [&str; 20] = [
    "showed",
    "found",
    "reported",
    "observed",
    "measured",
    "concluded",
    "demonstrated",
    "tested",
    "examined",
    "studied",
    "collected",
    "obtained",
    "performed",
    "conducted",
    "compared",
    "noted",
    "identified",
    "described",
    "confirmed",
    "revealed",
];

/// Present-tense main verbs (present-focus category only).
const PRESENT_VERBS: [&str; 14] = [
    "shows",
    "suggests",
    "indicates",
    "demonstrates",
    "appears",
    "occurs",
    "contains",
    "includes",
    "provides",
    "offers",
    "requires",
    "involves",
    "remains",
    "exists",
];

/// Future-focus words. "later" is also a temporal connective, which keeps
/// it out of content-word features but not out of the focus count.
const FUTURE_WORDS: [&str; 10] = [
    "soon",
    "future",
    "upcoming",
    "eventually",
    "later",
    "ahead",
    "expected",
    "anticipated",
    "planned",
    "prospective",
];

/// Positive-emotion words, screened against overlap with the cause and
/// future categories ("effective" and "promising" are excluded for that
/// reason).
const POSEMO_WORDS: [&str; 13] = [
    "good",
    "robust",
    "reliable",
    "novel",
    "accurate",
    "valuable",
    "optimal",
    "successful",
    "beneficial",
    "improved",
    "useful",
    "excellent",
    "favorable",
];

/// Cause words, screened against nominal suffixes so reuse never leaks into
/// noun overlap.
const CAUSE_WORDS: [&str; 16] = [
    "because",
    "due",
    "caused",
    "causes",
    "effects",
    "resulted",
    "results",
    "impact",
    "impacts",
    "outcomes",
    "depends",
    "driven",
    "produced",
    "induced",
    "generated",
    "triggered",
];

const PLURAL_PRONOUNS: [&str; 3] = ["they", "them", "their"];

const NUMBER_WORDS: [&str; 10] = [
    "two", "three", "five", "seven", "ten", "twenty", "hundred", "dozen", "half", "percent",
];

/// Filler content words. None carries a lexicon category and none stems to a
/// nominal suffix, so fillers drive vocabulary reuse (and with it the LSA
/// given/new score) without touching noun overlap or the category counts.
const FILLERS: [&str; 48] = [
    "analysis",
    "data",
    "method",
    "model",
    "estimate",
    "pattern",
    "level",
    "measure",
    "period",
    "region",
    "group",
    "value",
    "factor",
    "hypothesis",
    "knowledge",
    "procedure",
    "protocol",
    "criteria",
    "baseline",
    "subset",
    "profile",
    "context",
    "summary",
    "approach",
    "design",
    "scale",
    "index",
    "ratio",
    "range",
    "record",
    "survey",
    "review",
    "panel",
    "matrix",
    "cluster",
    "interval",
    "margin",
    "threshold",
    "gradient",
    "spectrum",
    "clinical",
    "common",
    "viral",
    "respiratory",
    "chronic",
    "acute",
    "seasonal",
    "standard",
];

/// Small glue words inserted between content slots.
const GLUE_WORDS: [&str; 8] = ["of", "in", "with", "for", "during", "across", "between", "under"];

/// Surnames used only inside author-year citations, which cleaning removes.
const CITE_NAMES: [&str; 4] = ["Chen", "Alvarez", "Okafor", "Larsen"];

/// Inclusive rate bounds. A document picks one band uniformly, then draws
/// its per-slot rate inside that band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Band { lo, hi }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.hi > self.lo {
            rng.gen_range(self.lo..self.hi)
        } else {
            self.lo
        }
    }
}

/// Per-class generation knobs. The `*_rate` fields are per content slot,
/// not per word: glue and frame words dilute them by roughly a third.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    /// Probability that a sentence's main verb is past tense (the rest are
    /// present tense).
    pub past_verb_share: f64,
    pub future_rate: f64,
    pub posemo_rate: f64,
    pub number_rate: f64,
    pub pronoun_rate: f64,
    /// Cause-word rate bands; two disjoint bands make the class nonlinear
    /// in that column.
    pub cause_bands: Vec<Band>,
    /// Share of filler slots that re-draw a word already used in the
    /// document, which raises the LSA given/new score.
    pub reuse_bands: Vec<Band>,
    /// Distinct subject/object nouns available to one document; smaller
    /// pools force repeats and raise noun overlap.
    pub topic_pool: usize,
}

/// Everything the generator needs: class sizes, shape ranges, a seed, and
/// the two class profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub docs_high: usize,
    pub docs_moderate: usize,
    /// Inclusive sentence-count range per document.
    pub sentences: (usize, usize),
    /// Inclusive content-slot range per sentence, on top of the fixed
    /// subject-verb-object frame.
    pub slots: (usize, usize),
    pub seed: u64,
    pub high: ClassProfile,
    pub moderate: ClassProfile,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            docs_high: 100,
            docs_moderate: 100,
            sentences: (8, 14),
            slots: (10, 16),
            seed: 7,
            high: ClassProfile {
                past_verb_share: 0.57,
                future_rate: 0.021,
                posemo_rate: 0.039,
                number_rate: 0.039,
                pronoun_rate: 0.024,
                cause_bands: vec![Band::new(0.085, 0.095)],
                reuse_bands: vec![Band::new(0.45, 0.55)],
                topic_pool: 8,
            },
            moderate: ClassProfile {
                past_verb_share: 0.50,
                future_rate: 0.027,
                posemo_rate: 0.033,
                number_rate: 0.033,
                pronoun_rate: 0.028,
                cause_bands: vec![Band::new(0.0, 0.01), Band::new(0.20, 0.24)],
                reuse_bands: vec![Band::new(0.0, 0.06), Band::new(0.90, 1.0)],
                topic_pool: 10,
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("both classes need at least one document (got {high} HIGH, {moderate} MODERATE)")]
    EmptyClass { high: usize, moderate: usize },
    #[error("bad {what} range: lo {lo} must be at least {min} and at most hi {hi}")]
    BadRange {
        what: &'static str,
        lo: usize,
        hi: usize,
        min: usize,
    },
    #[error("topic pool of {0} exceeds the {1} available topics")]
    TopicPool(usize, usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn validate(spec: &SyntheticSpec) -> Result<(), SynthError> {
    if spec.docs_high == 0 || spec.docs_moderate == 0 {
        return Err(SynthError::EmptyClass {
            high: spec.docs_high,
            moderate: spec.docs_moderate,
        });
    }
    // Two sentences minimum keeps every pairwise feature defined.
    let ranges = [("sentences", spec.sentences, 2), ("slots", spec.slots, 4)];
    for (what, (lo, hi), min) in ranges {
        if lo < min || lo > hi {
            return Err(SynthError::BadRange { what, lo, hi, min });
        }
    }
    for profile in [&spec.high, &spec.moderate] {
        if profile.topic_pool < 2 || profile.topic_pool > TOPICS.len() {
            return Err(SynthError::TopicPool(profile.topic_pool, TOPICS.len()));
        }
    }
    Ok(())
}

fn pick<'a>(pool: &[&'a str], rng: &mut ChaCha8Rng) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

/// Sample `k` distinct entries, preserving pool order within the sample.
fn sample_distinct<'a>(pool: &[&'a str], k: usize, rng: &mut ChaCha8Rng) -> Vec<&'a str> {
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    for i in 0..k {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    let mut chosen = indices[..k].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| pool[i]).collect()
}

fn number_token(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.5) {
        pick(&NUMBER_WORDS, rng).to_string()
    } else {
        // Digit forms tokenize as numbers, which also count as number words.
        match rng.gen_range(0..3) {
            0 => format!("{}", rng.gen_range(2..100)),
            1 => format!("{}.{}", rng.gen_range(0..10), rng.gen_range(1..10)),
            _ => format!("{}%", rng.gen_range(1..100)),
        }
    }
}

struct DocState<'a> {
    topics: Vec<&'a str>,
    used_fillers: Vec<&'a str>,
    cause_rate: f64,
    reuse_rate: f64,
}

fn filler<'a>(state: &mut DocState<'a>, rng: &mut ChaCha8Rng) -> &'a str {
    let reuse = !state.used_fillers.is_empty() && rng.gen_bool(state.reuse_rate);
    if reuse {
        state.used_fillers[rng.gen_range(0..state.used_fillers.len())]
    } else {
        let word = pick(&FILLERS, rng);
        state.used_fillers.push(word);
        word
    }
}

fn sentence(
    profile: &ClassProfile,
    spec: &SyntheticSpec,
    state: &mut DocState<'_>,
    rng: &mut ChaCha8Rng,
) -> String {
    let subject = state.topics[rng.gen_range(0..state.topics.len())];
    let object = loop {
        let t = state.topics[rng.gen_range(0..state.topics.len())];
        if t != subject {
            break t;
        }
    };
    let verb = if rng.gen_bool(profile.past_verb_share) {
        pick(&PAST_VERBS, rng)
    } else {
        pick(&PRESENT_VERBS, rng)
    };

    let mut words: Vec<String> = vec![
        "The".to_string(),
        subject.to_string(),
        verb.to_string(),
        "the".to_string(),
        object.to_string(),
    ];
    let n_slots = rng.gen_range(spec.slots.0..=spec.slots.1);
    for i in 0..n_slots {
        if i % 3 == 2 {
            words.push(pick(&GLUE_WORDS, rng).to_string());
        }
        let t_cause = state.cause_rate;
        let t_posemo = t_cause + profile.posemo_rate;
        let t_future = t_posemo + profile.future_rate;
        let t_number = t_future + profile.number_rate;
        let t_pronoun = t_number + profile.pronoun_rate;
        let r: f64 = rng.gen();
        let word = if r < t_cause {
            pick(&CAUSE_WORDS, rng).to_string()
        } else if r < t_posemo {
            pick(&POSEMO_WORDS, rng).to_string()
        } else if r < t_future {
            pick(&FUTURE_WORDS, rng).to_string()
        } else if r < t_number {
            number_token(rng)
        } else if r < t_pronoun {
            pick(&PLURAL_PRONOUNS, rng).to_string()
        } else {
            filler(state, rng).to_string()
        };
        words.push(word);
    }
    let mut text = words.join(" ");
    text.push('.');
    // Citation noise exercises the cleaning rules; both forms vanish before
    // tokenization.
    if rng.gen_bool(0.12) {
        if rng.gen_bool(0.5) {
            text.push_str(&format!(" [{}]", rng.gen_range(1..40)));
        } else {
            text.push_str(&format!(
                " ({} {})",
                pick(&CITE_NAMES, rng),
                rng.gen_range(2014..2024)
            ));
        }
    }
    text
}

fn document(profile: &ClassProfile, spec: &SyntheticSpec, seed: u64) -> String {
    let mut rng = seeded(seed);
    // One selector for both band lists, so a document at a cause extreme
    // sits at the matching reuse extreme: the off-center class occupies
    // corners of that plane rather than a smear across it.
    let n_bands = profile.cause_bands.len().max(profile.reuse_bands.len());
    let band = rng.gen_range(0..n_bands);
    let mut state = DocState {
        topics: sample_distinct(&TOPICS, profile.topic_pool, &mut rng),
        used_fillers: Vec::new(),
        cause_rate: profile.cause_bands[band % profile.cause_bands.len()].sample(&mut rng),
        reuse_rate: profile.reuse_bands[band % profile.reuse_bands.len()].sample(&mut rng),
    };
    let n_sentences = rng.gen_range(spec.sentences.0..=spec.sentences.1);
    let mut parts = Vec::with_capacity(n_sentences + 1);
    for _ in 0..n_sentences {
        parts.push(sentence(profile, spec, &mut state, &mut rng));
    }
    // One caption line per few documents; the caption-line rule strips it.
    if rng.gen_bool(0.25) {
        let at = rng.gen_range(1..=parts.len());
        parts.insert(
            at,
            format!(
                "\nTable {}: weekly case counts by region.\n",
                rng.gen_range(1..6)
            ),
        );
    }
    parts.join(" ")
}

/// Generate the corpus in memory: HIGH documents first, then MODERATE, each
/// document seeded independently so the set is stable under reordering.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<RawDocument>, SynthError> {
    validate(spec)?;
    let mut docs = Vec::with_capacity(spec.docs_high + spec.docs_moderate);
    for i in 0..spec.docs_high {
        docs.push(RawDocument {
            id: format!("high_{i:03}"),
            label: Label::High,
            text: document(&spec.high, spec, derive_seed(spec.seed, i as u64)),
            source_path: String::new(),
        });
    }
    for i in 0..spec.docs_moderate {
        docs.push(RawDocument {
            id: format!("moderate_{i:03}"),
            label: Label::Moderate,
            text: document(
                &spec.moderate,
                spec,
                derive_seed(spec.seed, (spec.docs_high + i) as u64),
            ),
            source_path: String::new(),
        });
    }
    Ok(docs)
}

/// Write one text file per document plus a `manifest.csv` naming them all;
/// returns the manifest path. Files land directly in `dir`.
pub fn write_corpus(spec: &SyntheticSpec, dir: &Path) -> Result<PathBuf, SynthError> {
    let docs = generate(spec)?;
    fs::create_dir_all(dir)?;
    let mut manifest = String::from("path,label\n");
    for doc in &docs {
        let file = format!("{}.txt", doc.id);
        fs::write(dir.join(&file), &doc.text)?;
        manifest.push_str(&format!("{},{}\n", file, doc.label.as_str()));
    }
    let manifest_path = dir.join("manifest.csv");
    let mut f = fs::File::create(&manifest_path)?;
    f.write_all(manifest.as_bytes())?;
    f.flush()?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{annotate, load_corpus, prepare_document, CleanRuleSet};
    use crate::lexicons::Lexicon;
    use std::collections::BTreeSet;

    fn lexicon() -> Lexicon {
        Lexicon::parse_str(include_str!("../assets/lexicon.tsv")).unwrap()
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let spec = SyntheticSpec {
            docs_high: 4,
            docs_moderate: 4,
            ..SyntheticSpec::default()
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);

        let mut reseeded = spec.clone();
        reseeded.seed = 8;
        let c = generate(&reseeded).unwrap();
        assert_ne!(a[0].text, c[0].text);
    }

    #[test]
    fn class_sizes_and_labels_match_the_spec() {
        let spec = SyntheticSpec {
            docs_high: 3,
            docs_moderate: 5,
            ..SyntheticSpec::default()
        };
        let docs = generate(&spec).unwrap();
        assert_eq!(docs.len(), 8);
        assert_eq!(docs.iter().filter(|d| d.label == Label::High).count(), 3);
        assert_eq!(docs[0].id, "high_000");
        assert_eq!(docs[3].id, "moderate_000");
    }

    #[test]
    fn empty_class_is_rejected() {
        let spec = SyntheticSpec {
            docs_high: 0,
            docs_moderate: 5,
            ..SyntheticSpec::default()
        };
        assert!(matches!(
            generate(&spec),
            Err(SynthError::EmptyClass { high: 0, .. })
        ));
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let mut spec = SyntheticSpec::default();
        spec.sentences = (1, 4);
        assert!(matches!(
            generate(&spec),
            Err(SynthError::BadRange {
                what: "sentences",
                ..
            })
        ));
        spec.sentences = (9, 4);
        assert!(generate(&spec).is_err());
    }

    /// Every pool word must map to exactly the categories the generator
    /// assumes, otherwise the planted rates leak into unplanned columns.
    #[test]
    fn pools_map_to_the_intended_categories() {
        let lex = lexicon();
        let single = |word: &str, want: &str| {
            let cats = lex.match_categories(word);
            assert!(
                cats.iter().any(|c| c.as_str() == want),
                "{word} should be {want}, got {cats:?}"
            );
        };
        for w in PAST_VERBS {
            single(w, "focus.past");
            assert_eq!(lex.match_categories(w).len(), 1, "{w} has extra categories");
        }
        for w in PRESENT_VERBS {
            single(w, "focus.present");
            assert_eq!(lex.match_categories(w).len(), 1, "{w} has extra categories");
        }
        for w in FUTURE_WORDS {
            single(w, "focus.future");
        }
        for w in POSEMO_WORDS {
            single(w, "emotion.positive");
            assert!(
                !lex.match_categories(w)
                    .iter()
                    .any(|c| c.as_str() == "cognition.cause"),
                "{w} would leak into the cause count"
            );
        }
        for w in CAUSE_WORDS {
            single(w, "cognition.cause");
        }
        for w in PLURAL_PRONOUNS {
            single(w, "pronoun.third_plural");
        }
        for w in NUMBER_WORDS {
            single(w, "number_word");
        }
        for w in GLUE_WORDS {
            single(w, "preposition");
        }
    }

    /// Fillers must stay invisible to the category counters and to noun
    /// candidacy, so reuse only moves the LSA given/new column.
    #[test]
    fn fillers_are_category_free_and_never_nouns() {
        let lex = lexicon();
        for w in FILLERS {
            assert!(
                lex.match_categories(w).is_empty(),
                "filler {w} matches a lexicon category"
            );
            let stem = crate::corpus::stem(w);
            for suffix in ["tion", "ment", "ity", "ness", "ism", "ance", "ence", "ology"] {
                assert!(
                    !stem.ends_with(suffix),
                    "filler {w} stems to a nominal suffix"
                );
            }
        }
    }

    #[test]
    fn documents_survive_prepare_and_annotate() {
        let spec = SyntheticSpec {
            docs_high: 3,
            docs_moderate: 3,
            ..SyntheticSpec::default()
        };
        let lex = lexicon();
        let rules = CleanRuleSet::default_rules();
        for raw in generate(&spec).unwrap() {
            let doc = annotate(prepare_document(&raw, &rules), &lex).unwrap();
            assert!(doc.sentences.len() >= spec.sentences.0);
            assert!(doc.sentences.len() <= spec.sentences.1);
            for s in &doc.sentences {
                assert!(
                    !s.text.contains('[') && !s.text.contains('('),
                    "citation noise survived cleaning: {}",
                    s.text
                );
            }
            let has_noun = doc
                .sentences
                .iter()
                .all(|s| s.tokens.iter().any(|t| t.is_noun_candidate));
            assert!(has_noun, "every sentence carries a subject noun");
        }
    }

    #[test]
    fn caption_noise_is_removed() {
        // Seeds are cheap: scan until a caption appears, then check it.
        let mut spec = SyntheticSpec {
            docs_high: 25,
            docs_moderate: 1,
            ..SyntheticSpec::default()
        };
        spec.seed = 11;
        let docs = generate(&spec).unwrap();
        let with_caption: Vec<_> = docs
            .iter()
            .filter(|d| d.text.contains("Table "))
            .collect();
        assert!(
            !with_caption.is_empty(),
            "expected at least one caption in 26 documents"
        );
        let rules = CleanRuleSet::default_rules();
        for raw in with_caption {
            let doc = prepare_document(raw, &rules);
            for s in &doc.sentences {
                assert!(!s.text.contains("Table"), "caption survived: {}", s.text);
            }
        }
    }

    #[test]
    fn written_corpus_round_trips_through_the_manifest() {
        let spec = SyntheticSpec {
            docs_high: 3,
            docs_moderate: 2,
            ..SyntheticSpec::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_corpus(&spec, dir.path()).unwrap();
        let loaded = load_corpus(&manifest).unwrap();
        let generated = generate(&spec).unwrap();
        assert_eq!(loaded.len(), generated.len());
        for (l, g) in loaded.iter().zip(&generated) {
            assert_eq!(l.text, g.text);
            assert_eq!(l.label, g.label);
        }
        let names: BTreeSet<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        assert!(names.contains("high_000.txt"));
        assert!(names.contains("moderate_001.txt"));
        assert!(names.contains("manifest.csv"));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = SyntheticSpec::default();
        let json = serde_json::to_string(&spec).unwrap();
        let back: SyntheticSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
