//! Subcommand front end over the library pipeline. All run configuration
//! lives in one JSON file; `--seed` and `--out` override only the seeds and
//! the output directory. Every failure prints a one-line JSON object to
//! standard error and exits with the stage-specific code (2 bad config,
//! 3 missing artifact, 4 data error, 5 numerical error); written artifact
//! paths go to standard output on success.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use textimpact::pipeline::{
    json_sha256, run_pipeline, stage_evaluate, stage_extract, stage_prepare, stage_report,
    stage_select, stage_train, RunConfig, StageError, StageErrorKind,
};
use textimpact::synth::{write_corpus, SynthError, SyntheticSpec};

#[derive(Parser)]
#[command(
    name = "textimpact",
    version,
    about = "Classify research-article texts into impact classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, clean, and annotate the corpus named by the manifest
    Prepare(StageArgs),
    /// Extract the feature matrix from the prepared corpus
    Extract(StageArgs),
    /// Rank feature columns with the four filter methods and keep the top K
    Select(StageArgs),
    /// Tune and fit the four model families on the training split
    Train(StageArgs),
    /// Score the tuned models on the held-out test split
    Evaluate(StageArgs),
    /// Write the run summary, comparison table, and forest drawing
    Report(StageArgs),
    /// Run every stage in order
    Pipeline(StageArgs),
    /// Generate a labeled synthetic corpus plus its manifest
    Synth(SynthArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Run configuration JSON
    #[arg(long)]
    config: PathBuf,
    /// Replace every seed in the config with this one
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the configured output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Documents per class as HIGH,MODERATE
    #[arg(long, value_parser = parse_docs)]
    docs: Option<(usize, usize)>,
    /// Generator seed
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the text files and manifest
    #[arg(long, default_value = "synth-corpus")]
    out: PathBuf,
    /// Full generator spec JSON; --docs and --seed still apply on top
    #[arg(long)]
    spec: Option<PathBuf>,
}

fn parse_docs(s: &str) -> Result<(usize, usize), String> {
    let (high, moderate) = s
        .split_once(',')
        .ok_or_else(|| format!("expected HIGH,MODERATE counts, got {s:?}"))?;
    let parse = |part: &str, class: &str| {
        part.trim()
            .parse::<usize>()
            .map_err(|e| format!("{class} count {part:?}: {e}"))
    };
    Ok((parse(high, "HIGH")?, parse(moderate, "MODERATE")?))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = StageError::new(StageErrorKind::ConfigInvalid, "cli", e.to_string());
            eprintln!("{}", err.error_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.error_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<Vec<PathBuf>, StageError> {
    match command {
        Command::Prepare(a) => stage(a, |cfg| stage_prepare(cfg).map(|p| vec![p])),
        Command::Extract(a) => stage(a, |cfg| stage_extract(cfg).map(|p| vec![p])),
        Command::Select(a) => stage(a, |cfg| stage_select(cfg).map(|p| vec![p])),
        Command::Train(a) => stage(a, stage_train),
        Command::Evaluate(a) => stage(a, |cfg| stage_evaluate(cfg).map(|p| vec![p])),
        Command::Report(a) => stage(a, stage_report),
        Command::Pipeline(a) => stage(a, run_pipeline),
        Command::Synth(a) => synth(a),
    }
}

fn stage(
    args: StageArgs,
    f: impl FnOnce(&RunConfig) -> Result<Vec<PathBuf>, StageError>,
) -> Result<Vec<PathBuf>, StageError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.override_seed(seed);
    }
    if let Some(out) = args.out {
        cfg.paths.out_dir = out;
    }
    f(&cfg)
}

fn synth(args: SynthArgs) -> Result<Vec<PathBuf>, StageError> {
    const STAGE: &str = "synth";
    let mut spec: SyntheticSpec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                StageError::new(
                    StageErrorKind::ConfigInvalid,
                    STAGE,
                    format!("{}: {e}", path.display()),
                )
            })?;
            serde_json::from_str(&text).map_err(|e| {
                StageError::new(
                    StageErrorKind::ConfigInvalid,
                    STAGE,
                    format!("{}: {e}", path.display()),
                )
            })?
        }
        None => SyntheticSpec::default(),
    };
    if let Some((high, moderate)) = args.docs {
        spec.docs_high = high;
        spec.docs_moderate = moderate;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }

    let manifest = write_corpus(&spec, &args.out).map_err(synth_err)?;

    // Sidecar so the generated corpus carries its own recipe and seed.
    let meta = serde_json::json!({
        "spec_hash": json_sha256(&spec),
        "seed": spec.seed,
        "spec": spec,
    });
    let meta_path = args.out.join("synth.meta.json");
    let tmp = meta_path.with_extension("tmp");
    let mut text = serde_json::to_string_pretty(&meta).expect("spec serializes");
    text.push('\n');
    let io_err = |e: std::io::Error, p: &PathBuf| {
        StageError::new(StageErrorKind::DataError, STAGE, format!("{}: {e}", p.display()))
    };
    fs::write(&tmp, text).map_err(|e| io_err(e, &tmp))?;
    fs::rename(&tmp, &meta_path).map_err(|e| io_err(e, &meta_path))?;
    Ok(vec![manifest, meta_path])
}

/// Bad generator parameters are config problems; only filesystem failures
/// count as data errors.
fn synth_err(e: SynthError) -> StageError {
    let kind = match &e {
        SynthError::Io(_) => StageErrorKind::DataError,
        _ => StageErrorKind::ConfigInvalid,
    };
    StageError::new(kind, "synth", e.to_string())
}
