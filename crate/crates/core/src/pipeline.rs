//! Disk-backed run orchestration. Each stage reads its predecessor's
//! artifact back from the output directory and writes its own with a
//! write-temp-then-rename, so running the stages one at a time is byte
//! for byte the same as running them in one call. Every artifact carries
//! the config hash and the seed set; nothing embeds a timestamp, so a
//! re-run with the same config reproduces identical bytes.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{annotate, load_corpus, prepare_document, CleanRuleSet, PreparedDocument};
use crate::evaluation::{
    evaluate, stratified_holdout, train_with_protocol, EvalError, EvalReport, SplitPlan,
    TrainProtocol, TuneOutcome,
};
use crate::features::{
    default_registry, extended_registry, extract_matrix, FeatureMatrix, MatrixMeta,
    RegistryConfig, Resources,
};
use crate::learners::{AnyModel, LearnerError, ModelSpec, TreeParams};
use crate::lexicons::{FrequencyTable, Lexicon, NormsTable};
use crate::par;
use crate::reporting::{
    comparison_csv, importance_table, layout_tree, render_forest_svg, tree_rules, RunSummary,
    REPORT_SCHEMA_VERSION,
};
use crate::selection::{reduce_matrix, score_matrix, SelectionConfig, SelectionReport};
use crate::Label;

pub const CORPUS_FILE: &str = "corpus.json";
pub const FEATURES_FILE: &str = "features.csv";
pub const FEATURES_META_FILE: &str = "features.meta.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const REPORT_FILE: &str = "report.json";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const COMPARISON_META_FILE: &str = "comparison.meta.json";
pub const FOREST_SVG_FILE: &str = "forest.svg";

/// Family names in comparison-table order.
pub const FAMILIES: [&str; 4] = ["ridge", "lasso", "cart", "random_forest"];

pub fn model_file(family: &str) -> String {
    format!("model_{family}.json")
}

/// Failure class, mapped one-to-one onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageErrorKind {
    /// The config itself is unusable: parse failure, bad values, missing
    /// input files it references.
    ConfigInvalid,
    /// A predecessor stage's artifact is absent.
    MissingArtifact,
    /// The data cannot be processed: corpus, lexicon, matrix, or artifact
    /// content problems.
    DataError,
    /// A solver failed numerically.
    NumericalError,
}

impl StageErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            StageErrorKind::ConfigInvalid => 2,
            StageErrorKind::MissingArtifact => 3,
            StageErrorKind::DataError => 4,
            StageErrorKind::NumericalError => 5,
        }
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct StageError {
    pub kind: StageErrorKind,
    pub stage: &'static str,
    pub message: String,
}

impl StageError {
    pub fn new(kind: StageErrorKind, stage: &'static str, message: impl Into<String>) -> Self {
        StageError {
            kind,
            stage,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// One-line machine-readable form for standard error.
    pub fn error_json(&self) -> String {
        serde_json::json!({
            "error": {
                "stage": self.stage,
                "kind": self.kind,
                "code": self.exit_code(),
                "message": self.message,
            }
        })
        .to_string()
    }
}

fn config_err(stage: &'static str, message: impl Display) -> StageError {
    StageError::new(StageErrorKind::ConfigInvalid, stage, message.to_string())
}

fn data_err(stage: &'static str, message: impl Display) -> StageError {
    StageError::new(StageErrorKind::DataError, stage, message.to_string())
}

/// Map a tuning/evaluation failure onto the exit-code taxonomy: bad knob
/// values are config problems, solver breakdowns are numerical, and the
/// rest follow from the data.
fn eval_err(stage: &'static str, e: EvalError) -> StageError {
    let kind = match &e {
        EvalError::InvalidRatio(_) | EvalError::KTooSmall(_) | EvalError::EmptyGrid => {
            StageErrorKind::ConfigInvalid
        }
        EvalError::Learner(LearnerError::SingularSystem) => StageErrorKind::NumericalError,
        _ => StageErrorKind::DataError,
    };
    StageError::new(kind, stage, e.to_string())
}

/// Input files the config points at, plus the artifact directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub manifest: PathBuf,
    pub lexicon: PathBuf,
    pub norms: PathBuf,
    pub frequencies: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegistrySet {
    Default,
    Extended,
}

/// Which feature columns to extract and the LSA fitting parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub set: RegistrySet,
    pub lsa_k: usize,
    pub lsa_seed: u64,
}

impl Default for Registry {
    fn default() -> Self {
        Registry {
            set: RegistrySet::Default,
            lsa_k: 100,
            lsa_seed: 7,
        }
    }
}

impl Registry {
    pub fn to_config(&self) -> RegistryConfig {
        RegistryConfig {
            features: match self.set {
                RegistrySet::Default => default_registry(),
                RegistrySet::Extended => extended_registry(),
            },
            lsa_k: self.lsa_k,
            lsa_seed: self.lsa_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub ratio: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { ratio: 0.8, seed: 7 }
    }
}

/// One hyperparameter grid per model family. Every spec must belong to its
/// field's family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub ridge: Vec<ModelSpec>,
    pub lasso: Vec<ModelSpec>,
    pub tree: Vec<ModelSpec>,
    pub forest: Vec<ModelSpec>,
}

impl Default for Grids {
    fn default() -> Self {
        let tree = |max_depth: Option<usize>, ccp_alpha: f64| ModelSpec::Tree {
            params: TreeParams {
                max_depth,
                min_samples_split: 5,
                min_impurity_decrease: 0.0,
                ccp_alpha,
            },
        };
        Grids {
            ridge: [0.01, 0.1, 1.0, 10.0]
                .into_iter()
                .map(|lambda| ModelSpec::Ridge { lambda })
                .collect(),
            lasso: [0.001, 0.01, 0.1]
                .into_iter()
                .map(|lambda| ModelSpec::Lasso {
                    lambda,
                    tol: 1e-6,
                    max_iter: 10_000,
                })
                .collect(),
            tree: vec![tree(Some(3), 0.0), tree(Some(5), 0.0), tree(None, 0.01)],
            forest: vec![
                ModelSpec::Forest {
                    params: Default::default(),
                },
                ModelSpec::Forest {
                    params: crate::learners::ForestParams {
                        mtry: Some(8),
                        ..Default::default()
                    },
                },
                ModelSpec::Forest {
                    params: crate::learners::ForestParams {
                        tree: TreeParams {
                            max_depth: Some(8),
                            ..TreeParams::default()
                        },
                        ..Default::default()
                    },
                },
            ],
        }
    }
}

impl Grids {
    /// `(family name, grid)` pairs in comparison-table order.
    pub fn families(&self) -> [(&'static str, &[ModelSpec]); 4] {
        [
            ("ridge", &self.ridge),
            ("lasso", &self.lasso),
            ("cart", &self.tree),
            ("random_forest", &self.forest),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub cv_folds: usize,
    pub protocol: TrainProtocol,
    pub seed: u64,
    /// Omitting the grids in a config file selects the tuned defaults.
    #[serde(default)]
    pub grids: Grids,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            cv_folds: 10,
            protocol: TrainProtocol::default(),
            seed: 7,
            grids: Grids::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub svg: bool,
    pub rules: bool,
    pub importance: bool,
    /// Scale square areas by ln(1 + n) instead of n.
    pub log_area: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            svg: true,
            rules: true,
            importance: true,
            log_area: true,
        }
    }
}

/// The whole run in one JSON document. Every seed is explicit; nothing is
/// drawn from process entropy, and no environment variable is consulted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub registry: Registry,
    pub selection: SelectionConfig,
    pub split: SplitConfig,
    pub train: TrainConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

/// All four seeds, embedded in every artifact next to the config hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub lsa: u64,
    pub selection: u64,
    pub split: u64,
    pub train: u64,
}

/// Provenance block written into each artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamp {
    pub config_hash: String,
    pub seeds: SeedSet,
}

/// Artifact wrapper: a provenance stamp plus the stage's payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub stamp: Stamp,
    pub payload: T,
}

/// SHA-256 of a value's canonical JSON, as lowercase hex.
pub fn json_sha256<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("value serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    /// Config tuned for the synthetic demo corpus: extended registry so the
    /// top-25 cut is a real choice, 80/20 split, 10-fold tuning, seed 7
    /// throughout.
    pub fn demo(manifest: &Path, assets_dir: &Path, out_dir: &Path) -> RunConfig {
        RunConfig {
            paths: Paths {
                manifest: manifest.to_path_buf(),
                lexicon: assets_dir.join("lexicon.tsv"),
                norms: assets_dir.join("norms.csv"),
                frequencies: assets_dir.join("frequencies.csv"),
                out_dir: out_dir.to_path_buf(),
            },
            registry: Registry {
                set: RegistrySet::Extended,
                ..Registry::default()
            },
            selection: SelectionConfig::default(),
            split: SplitConfig::default(),
            train: TrainConfig::default(),
            report: ReportConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<RunConfig, StageError> {
        const STAGE: &str = "config";
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(STAGE, format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| config_err(STAGE, format!("{}: {e}", path.display())))
    }

    /// Reject configs that cannot possibly run: absent input files, empty
    /// or misfiled grids, or out-of-range knobs.
    pub fn validate(&self) -> Result<(), StageError> {
        const STAGE: &str = "config";
        for (name, path) in [
            ("manifest", &self.paths.manifest),
            ("lexicon", &self.paths.lexicon),
            ("norms", &self.paths.norms),
            ("frequencies", &self.paths.frequencies),
        ] {
            if !path.is_file() {
                return Err(config_err(
                    STAGE,
                    format!("{name} file does not exist: {}", path.display()),
                ));
            }
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return Err(config_err(
                STAGE,
                format!("split ratio must lie in (0, 1), got {}", self.split.ratio),
            ));
        }
        if self.train.cv_folds < 2 {
            return Err(config_err(
                STAGE,
                format!("cv_folds must be at least 2, got {}", self.train.cv_folds),
            ));
        }
        if self.registry.lsa_k == 0 {
            return Err(config_err(STAGE, "lsa_k must be positive"));
        }
        if self.selection.k == 0 || self.selection.bins < 2 || self.selection.relieff_k == 0 {
            return Err(config_err(
                STAGE,
                "selection needs k >= 1, bins >= 2, relieff_k >= 1",
            ));
        }
        for (family, grid) in self.train.grids.families() {
            if grid.is_empty() {
                return Err(config_err(STAGE, format!("{family} grid is empty")));
            }
            for spec in grid {
                if spec.name() != family {
                    return Err(config_err(
                        STAGE,
                        format!("{family} grid holds a {} spec", spec.name()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Point every stage at one seed; paths and other knobs are untouched.
    pub fn override_seed(&mut self, seed: u64) {
        self.registry.lsa_seed = seed;
        self.selection.seed = seed;
        self.split.seed = seed;
        self.train.seed = seed;
    }

    pub fn config_hash(&self) -> String {
        json_sha256(self)
    }

    pub fn seeds(&self) -> SeedSet {
        SeedSet {
            lsa: self.registry.lsa_seed,
            selection: self.selection.seed,
            split: self.split.seed,
            train: self.train.seed,
        }
    }

    fn stamp(&self) -> Stamp {
        Stamp {
            config_hash: self.config_hash(),
            seeds: self.seeds(),
        }
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.paths.out_dir.join(name)
    }
}

/// Write via a temp file in the same directory, then rename over the final
/// name, so readers never observe a half-written artifact.
fn write_atomic(stage: &'static str, path: &Path, bytes: &[u8]) -> Result<(), StageError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| data_err(stage, format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| data_err(stage, format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(stage: &'static str, path: &Path, value: &T) -> Result<(), StageError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| data_err(stage, format!("serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(stage, path, text.as_bytes())
}

/// Read a stage artifact; a missing file is the caller skipping a stage.
fn read_json<T: DeserializeOwned>(stage: &'static str, path: &Path) -> Result<T, StageError> {
    if !path.is_file() {
        return Err(StageError::new(
            StageErrorKind::MissingArtifact,
            stage,
            format!("artifact not found: {} (run the earlier stages first)", path.display()),
        ));
    }
    let text =
        fs::read_to_string(path).map_err(|e| data_err(stage, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| data_err(stage, format!("{}: {e}", path.display())))
}

fn check_stamp(stage: &'static str, expected: &Stamp, found: &Stamp, what: &str) -> Result<(), StageError> {
    if expected != found {
        return Err(data_err(
            stage,
            format!("{what} was produced by a different config or seeds; re-run the earlier stages"),
        ));
    }
    Ok(())
}

fn load_resources(
    stage: &'static str,
    cfg: &RunConfig,
) -> Result<(Lexicon, NormsTable, FrequencyTable), StageError> {
    let lexicon =
        Lexicon::load(&cfg.paths.lexicon).map_err(|e| data_err(stage, e))?;
    let norms = NormsTable::load(&cfg.paths.norms, (1.0, 7.0)).map_err(|e| data_err(stage, e))?;
    let freqs =
        FrequencyTable::load(&cfg.paths.frequencies).map_err(|e| data_err(stage, e))?;
    Ok((lexicon, norms, freqs))
}

/// Load, clean, segment, tokenize, and annotate the corpus named by the
/// manifest; writes `corpus.json`.
pub fn stage_prepare(cfg: &RunConfig) -> Result<PathBuf, StageError> {
    const STAGE: &str = "prepare";
    cfg.validate()?;
    fs::create_dir_all(&cfg.paths.out_dir)
        .map_err(|e| data_err(STAGE, format!("{}: {e}", cfg.paths.out_dir.display())))?;
    let lexicon = Lexicon::load(&cfg.paths.lexicon).map_err(|e| data_err(STAGE, e))?;
    let raw = load_corpus(&cfg.paths.manifest).map_err(|e| data_err(STAGE, e))?;
    if raw.is_empty() {
        return Err(data_err(STAGE, "manifest names no documents"));
    }
    let rules = CleanRuleSet::default_rules();
    let prepared: Vec<PreparedDocument> = par::map_slice(&raw, |doc| {
        annotate(prepare_document(doc, &rules), &lexicon)
    })
    .into_iter()
    .collect::<Result<_, _>>()
    .map_err(|e| data_err(STAGE, e))?;

    let path = cfg.artifact(CORPUS_FILE);
    write_json(
        STAGE,
        &path,
        &Envelope {
            stamp: cfg.stamp(),
            payload: prepared,
        },
    )?;
    Ok(path)
}

/// Extract the configured feature columns from the prepared corpus and
/// impute column means; writes `features.csv` plus its metadata sidecar.
pub fn stage_extract(cfg: &RunConfig) -> Result<PathBuf, StageError> {
    const STAGE: &str = "extract";
    cfg.validate()?;
    let corpus: Envelope<Vec<PreparedDocument>> = read_json(STAGE, &cfg.artifact(CORPUS_FILE))?;
    check_stamp(STAGE, &cfg.stamp(), &corpus.stamp, CORPUS_FILE)?;
    let (lexicon, norms, freqs) = load_resources(STAGE, cfg)?;
    let res = Resources {
        lexicon: &lexicon,
        norms: &norms,
        freqs: &freqs,
    };
    let mut matrix = extract_matrix(&corpus.payload, &cfg.registry.to_config(), &res)
        .map_err(|e| data_err(STAGE, e))?;
    matrix.impute_column_means();

    let path = cfg.artifact(FEATURES_FILE);
    let tmp = path.with_extension("tmp");
    matrix
        .write_csv(&tmp)
        .map_err(|e| data_err(STAGE, format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, &path).map_err(|e| data_err(STAGE, format!("{}: {e}", path.display())))?;
    write_json(
        STAGE,
        &cfg.artifact(FEATURES_META_FILE),
        &Envelope {
            stamp: cfg.stamp(),
            payload: matrix.meta.clone(),
        },
    )?;
    Ok(path)
}

fn read_matrix(stage: &'static str, cfg: &RunConfig) -> Result<FeatureMatrix, StageError> {
    let path = cfg.artifact(FEATURES_FILE);
    if !path.is_file() {
        return Err(StageError::new(
            StageErrorKind::MissingArtifact,
            stage,
            format!("artifact not found: {} (run the earlier stages first)", path.display()),
        ));
    }
    let mut matrix = FeatureMatrix::read_csv(&path)
        .map_err(|e| data_err(stage, format!("{}: {e}", path.display())))?;
    let meta: Envelope<MatrixMeta> = read_json(stage, &cfg.artifact(FEATURES_META_FILE))?;
    check_stamp(stage, &cfg.stamp(), &meta.stamp, FEATURES_META_FILE)?;
    matrix.meta = meta.payload;
    Ok(matrix)
}

/// Score every feature column with the four filter methods and aggregate
/// the rankings; writes `selection.json`.
pub fn stage_select(cfg: &RunConfig) -> Result<PathBuf, StageError> {
    const STAGE: &str = "select";
    cfg.validate()?;
    let matrix = read_matrix(STAGE, cfg)?;
    let report = score_matrix(&matrix, &cfg.selection).map_err(|e| data_err(STAGE, e))?;
    let path = cfg.artifact(SELECTION_FILE);
    write_json(
        STAGE,
        &path,
        &Envelope {
            stamp: cfg.stamp(),
            payload: report,
        },
    )?;
    Ok(path)
}

/// Per-family training artifact: the holdout plan and the tuned model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainArtifact {
    pub family: String,
    pub split: SplitPlan,
    pub outcome: TuneOutcome,
}

fn take(rows: &[Vec<f64>], labels: &[Label], ix: &[usize]) -> (Vec<Vec<f64>>, Vec<Label>) {
    (
        ix.iter().map(|&i| rows[i].clone()).collect(),
        ix.iter().map(|&i| labels[i]).collect(),
    )
}

/// Tune every family's grid by cross-validation on the training share of a
/// stratified holdout; writes one `model_<family>.json` per family.
pub fn stage_train(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    const STAGE: &str = "train";
    cfg.validate()?;
    let matrix = read_matrix(STAGE, cfg)?;
    let selection: Envelope<SelectionReport> = read_json(STAGE, &cfg.artifact(SELECTION_FILE))?;
    check_stamp(STAGE, &cfg.stamp(), &selection.stamp, SELECTION_FILE)?;
    let reduced =
        reduce_matrix(&matrix, &selection.payload.selected).map_err(|e| data_err(STAGE, e))?;
    let rows = reduced.dense_rows().map_err(|e| data_err(STAGE, e))?;
    let split = stratified_holdout(&reduced.labels, cfg.split.ratio, cfg.split.seed)
        .map_err(|e| eval_err(STAGE, e))?;
    let (train_rows, train_labels) = take(&rows, &reduced.labels, &split.train);

    let mut paths = Vec::with_capacity(FAMILIES.len());
    for (family, grid) in cfg.train.grids.families() {
        let outcome = train_with_protocol(
            grid,
            &train_rows,
            &train_labels,
            &reduced.features,
            cfg.train.cv_folds,
            cfg.train.seed,
            cfg.train.protocol,
        )
        .map_err(|e| eval_err(STAGE, e))?;
        let path = cfg.artifact(&model_file(family));
        write_json(
            STAGE,
            &path,
            &Envelope {
                stamp: cfg.stamp(),
                payload: TrainArtifact {
                    family: family.to_string(),
                    split: split.clone(),
                    outcome,
                },
            },
        )?;
        paths.push(path);
    }
    Ok(paths)
}

/// Evaluation artifact: the shared holdout plan and one report per family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationArtifact {
    pub split: SplitPlan,
    pub reports: Vec<EvalReport>,
}

fn read_model(stage: &'static str, cfg: &RunConfig, family: &str) -> Result<TrainArtifact, StageError> {
    let envelope: Envelope<TrainArtifact> = read_json(stage, &cfg.artifact(&model_file(family)))?;
    check_stamp(stage, &cfg.stamp(), &envelope.stamp, &model_file(family))?;
    if envelope.payload.family != family {
        return Err(data_err(
            stage,
            format!("model artifact family mismatch: {}", envelope.payload.family),
        ));
    }
    Ok(envelope.payload)
}

/// Score every tuned model on the held-out test rows; writes
/// `evaluation.json`.
pub fn stage_evaluate(cfg: &RunConfig) -> Result<PathBuf, StageError> {
    const STAGE: &str = "evaluate";
    cfg.validate()?;
    let matrix = read_matrix(STAGE, cfg)?;
    let selection: Envelope<SelectionReport> = read_json(STAGE, &cfg.artifact(SELECTION_FILE))?;
    check_stamp(STAGE, &cfg.stamp(), &selection.stamp, SELECTION_FILE)?;
    let reduced =
        reduce_matrix(&matrix, &selection.payload.selected).map_err(|e| data_err(STAGE, e))?;
    let rows = reduced.dense_rows().map_err(|e| data_err(STAGE, e))?;

    let mut split: Option<SplitPlan> = None;
    let mut reports = Vec::with_capacity(FAMILIES.len());
    for family in FAMILIES {
        let artifact = read_model(STAGE, cfg, family)?;
        match &split {
            None => split = Some(artifact.split.clone()),
            Some(existing) if *existing != artifact.split => {
                return Err(data_err(
                    STAGE,
                    "model artifacts disagree on the holdout split; re-run train",
                ));
            }
            Some(_) => {}
        }
        let (test_rows, test_labels) = take(&rows, &reduced.labels, &artifact.split.test);
        let predictions: Vec<_> = test_rows
            .iter()
            .map(|r| artifact.outcome.model.predict(r))
            .collect();
        let report = evaluate(&predictions, &test_labels)
            .map_err(|e| eval_err(STAGE, e))?
            .with_provenance(family, cfg.train.seed, None);
        reports.push(report);
    }

    let path = cfg.artifact(EVALUATION_FILE);
    write_json(
        STAGE,
        &path,
        &Envelope {
            stamp: cfg.stamp(),
            payload: EvaluationArtifact {
                split: split.expect("at least one family"),
                reports,
            },
        },
    )?;
    Ok(path)
}

/// Insert a provenance comment right after the XML declaration.
fn stamp_svg(svg: &mut String, stamp: &Stamp) {
    let at = svg.find('\n').map(|i| i + 1).unwrap_or(0);
    let seeds = stamp.seeds;
    svg.insert_str(
        at,
        &format!(
            "<!-- config_hash: {} seeds: lsa={} selection={} split={} train={} -->\n",
            stamp.config_hash, seeds.lsa, seeds.selection, seeds.split, seeds.train
        ),
    );
}

/// Assemble the run summary, comparison table, and forest drawing; writes
/// `report.json`, `comparison.csv` (with a metadata sidecar), and
/// `forest.svg` when enabled.
pub fn stage_report(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    const STAGE: &str = "report";
    cfg.validate()?;
    let selection: Envelope<SelectionReport> = read_json(STAGE, &cfg.artifact(SELECTION_FILE))?;
    check_stamp(STAGE, &cfg.stamp(), &selection.stamp, SELECTION_FILE)?;
    let evaluation: Envelope<EvaluationArtifact> = read_json(STAGE, &cfg.artifact(EVALUATION_FILE))?;
    check_stamp(STAGE, &cfg.stamp(), &evaluation.stamp, EVALUATION_FILE)?;

    let forest_model = if cfg.report.svg || cfg.report.importance {
        match read_model(STAGE, cfg, "random_forest")?.outcome.model {
            AnyModel::Forest(f) => Some(f),
            _ => {
                return Err(data_err(
                    STAGE,
                    "random_forest artifact does not hold a forest model",
                ))
            }
        }
    } else {
        None
    };
    let best_tree_rules = if cfg.report.rules {
        match read_model(STAGE, cfg, "cart")?.outcome.model {
            AnyModel::Tree(t) => tree_rules(&t),
            _ => return Err(data_err(STAGE, "cart artifact does not hold a tree model")),
        }
    } else {
        Vec::new()
    };

    let summary = RunSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        config: serde_json::to_value(cfg).map_err(|e| data_err(STAGE, e))?,
        seed: cfg.train.seed,
        selection: Some(selection.payload),
        models: evaluation.payload.reports.clone(),
        importance: forest_model
            .as_ref()
            .filter(|_| cfg.report.importance)
            .map(importance_table),
        best_tree_rules,
    };

    let mut written = Vec::new();
    let report_path = cfg.artifact(REPORT_FILE);
    write_json(
        STAGE,
        &report_path,
        &Envelope {
            stamp: cfg.stamp(),
            payload: summary,
        },
    )?;
    written.push(report_path);

    let comparison_path = cfg.artifact(COMPARISON_FILE);
    write_atomic(
        STAGE,
        &comparison_path,
        comparison_csv(&evaluation.payload.reports).as_bytes(),
    )?;
    write_json(
        STAGE,
        &cfg.artifact(COMPARISON_META_FILE),
        &Envelope {
            stamp: cfg.stamp(),
            payload: BTreeMap::from([("describes", COMPARISON_FILE)]),
        },
    )?;
    written.push(comparison_path);

    if cfg.report.svg {
        let forest = forest_model.expect("loaded when svg is on");
        let layouts: Vec<_> = forest
            .trees
            .iter()
            .map(|t| layout_tree(t, cfg.report.log_area))
            .collect();
        let mut svg = render_forest_svg(&forest, &layouts);
        stamp_svg(&mut svg, &cfg.stamp());
        let svg_path = cfg.artifact(FOREST_SVG_FILE);
        write_atomic(STAGE, &svg_path, svg.as_bytes())?;
        written.push(svg_path);
    }
    Ok(written)
}

/// Run every stage in order. Because each stage reads its inputs back from
/// disk, this is byte-identical to invoking the stages one at a time.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    let mut written = Vec::new();
    written.push(stage_prepare(cfg)?);
    written.push(stage_extract(cfg)?);
    written.push(stage_select(cfg)?);
    written.extend(stage_train(cfg)?);
    written.push(stage_evaluate(cfg)?);
    written.extend(stage_report(cfg)?);
    Ok(written)
}
