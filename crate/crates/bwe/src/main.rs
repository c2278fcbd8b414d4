//! `bwe`: speech bandwidth extension (8 kHz -> 48 kHz) over WAV corpora.
//!
//! Exit codes: 0 success, 1 partial failure (some utterances errored),
//! 2 configuration or contract error (nothing useful was produced).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bwe::config::{resolve_seed, ConfigFile};
use bwe::corpus::{
    cmd_degrade, cmd_evaluate, cmd_extend, cmd_features, cmd_train, BatchOutcome, DegradeOpts,
    EvaluateOpts, ExtendOpts, FeaturesOpts, PredictorSpec, TrainOpts,
};
use bwe::wav::WavEncoding;
use bwe_core::excite::{ExciterKind, FlatLevel};
use bwe_core::ltv::{LtvMode, DEFAULT_GAIN_CEILING_DB};
use bwe_core::pipeline::ExtendOptions;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bwe", version, about = "Dual-stage speech bandwidth extension")]
struct Cli {
    /// Line-based key = value config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed (BWE_SEED env var wins over both flag and file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExciterArg {
    Noise,
    Fold,
    Rect,
}

#[derive(Clone, Copy, ValueEnum)]
enum LtvModeArg {
    Direct,
    Match,
}

#[derive(Subcommand)]
enum Command {
    /// Bandlimit and decimate a 48 kHz corpus to 8 kHz, writing a manifest.
    Degrade(DegradeArgs),
    /// Extend a degraded 8 kHz corpus back to 48 kHz.
    Extend(ExtendArgs),
    /// Train the ridge envelope predictor from a degraded corpus.
    TrainPredictor(TrainArgs),
    /// Compute objective metrics of estimates against references.
    Evaluate(EvaluateArgs),
    /// Dump coarse features (or the magnitude spectrogram) of one WAV.
    Features(FeaturesArgs),
}

#[derive(Args)]
struct DegradeArgs {
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Manifest output path (default: <output_dir>/manifest.jsonl).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Write 16-bit PCM instead of 32-bit float.
    #[arg(long)]
    pcm16: bool,
}

#[derive(Args)]
struct ExtendArgs {
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// `oracle` or a path to a trained model file.
    #[arg(long)]
    predictor: Option<String>,
    /// 48 kHz ground-truth directory (required for the oracle predictor).
    #[arg(long)]
    references_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    exciter: Option<ExciterArg>,
    #[arg(long)]
    exciter_seed: Option<u64>,
    /// `passband-mean` or a fixed linear magnitude.
    #[arg(long)]
    flat_level: Option<String>,
    #[arg(long, value_enum)]
    ltv_mode: Option<LtvModeArg>,
    #[arg(long)]
    gain_ceiling_db: Option<f64>,
    #[arg(long)]
    pcm16: bool,
    /// Single-file mode: extend exactly this 8 kHz WAV (id = file stem).
    #[arg(long = "in", requires = "out_file")]
    in_file: Option<PathBuf>,
    /// Single-file mode: output path.
    #[arg(long = "out", requires = "in_file")]
    out_file: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Degraded 8 kHz corpus directory.
    #[arg(long)]
    input_dir: Option<PathBuf>,
    /// 48 kHz ground-truth directory.
    #[arg(long)]
    references_dir: Option<PathBuf>,
    /// Model output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Context radius in frames.
    #[arg(long)]
    context: Option<usize>,
    #[arg(long)]
    ridge: Option<f64>,
    /// Sweep the ridge grid and keep the best validation loss.
    #[arg(long)]
    sweep: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    estimates_dir: Option<PathBuf>,
    #[arg(long)]
    references_dir: Option<PathBuf>,
    /// Report output path (default: stdout).
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV instead of JSON lines.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV (one frame per line) instead of the binary dump.
    #[arg(long)]
    csv: bool,
    /// Dump the full magnitude spectrogram instead of coarse features.
    #[arg(long)]
    spectrogram: bool,
}

fn require(path: Option<PathBuf>, cfg: Option<&str>, what: &str) -> Result<PathBuf> {
    path.or_else(|| cfg.map(PathBuf::from))
        .with_context(|| format!("missing required setting: {what}"))
}

fn encoding_of(pcm16: bool, cfg: Option<&str>) -> Result<WavEncoding> {
    if pcm16 {
        return Ok(WavEncoding::Pcm16);
    }
    match cfg {
        None | Some("float32") => Ok(WavEncoding::Float32),
        Some("pcm16") => Ok(WavEncoding::Pcm16),
        Some(other) => bail!("unknown encoding `{other}` (expected float32 or pcm16)"),
    }
}

fn outcome_code(outcome: &BatchOutcome, what: &str) -> u8 {
    for (id, msg) in &outcome.errors {
        eprintln!("error: {what} {id}: {msg}");
    }
    eprintln!("{what}: {} ok, {} failed", outcome.processed, outcome.errors.len());
    u8::from(!outcome.errors.is_empty())
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let workers = match cli.workers.or(cfg.get_parsed("", "workers")?) {
        Some(n) if n > 0 => n,
        _ => 0,
    };
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("configuring worker pool")?;
    }
    let seed = resolve_seed(cli.seed, cfg.get_parsed("", "seed")?, 0)?;
    match cli.command {
        Command::Degrade(args) => {
            let output_dir =
                require(args.output_dir, cfg.get("degrade", "output_dir"), "degrade output_dir")?;
            let opts = DegradeOpts {
                input_dir: require(
                    args.input_dir,
                    cfg.get("degrade", "input_dir"),
                    "degrade input_dir",
                )?,
                manifest: args
                    .manifest
                    .or_else(|| cfg.get("degrade", "manifest").map(PathBuf::from))
                    .unwrap_or_else(|| output_dir.join("manifest.jsonl")),
                output_dir,
                seed,
                encoding: encoding_of(args.pcm16, cfg.get("degrade", "encoding"))?,
            };
            Ok(outcome_code(&cmd_degrade(&opts)?, "degrade"))
        }
        Command::Extend(args) => {
            let predictor_raw = args
                .predictor
                .or_else(|| cfg.get("extend", "predictor").map(String::from))
                .unwrap_or_else(|| "oracle".into());
            let references_dir =
                args.references_dir.or_else(|| cfg.get("extend", "references_dir").map(PathBuf::from));
            let predictor = if predictor_raw == "oracle" {
                PredictorSpec::Oracle {
                    references_dir: references_dir
                        .context("oracle predictor requires --references-dir")?,
                }
            } else {
                PredictorSpec::Model { path: PathBuf::from(predictor_raw) }
            };
            let exciter_seed =
                args.exciter_seed.or(cfg.get_parsed("extend", "exciter_seed")?).unwrap_or(seed);
            let flat_level = match args
                .flat_level
                .or_else(|| cfg.get("extend", "flat_level").map(String::from))
                .as_deref()
            {
                None | Some("passband-mean") => FlatLevel::PassbandMean,
                Some(raw) => FlatLevel::Fixed(
                    raw.parse::<f64>()
                        .with_context(|| format!("bad --flat-level value `{raw}`"))?,
                ),
            };
            let exciter_cfg = cfg.get("extend", "exciter");
            let exciter = match (args.exciter, exciter_cfg) {
                (Some(ExciterArg::Noise), _) | (None, None) | (None, Some("noise")) => {
                    ExciterKind::Noise { seed: exciter_seed, flat_level }
                }
                (Some(ExciterArg::Fold), _) | (None, Some("fold")) => ExciterKind::Fold,
                (Some(ExciterArg::Rect), _) | (None, Some("rect")) => ExciterKind::Rect,
                (None, Some(other)) => bail!("unknown exciter `{other}` in config"),
            };
            let ltv_mode = match (args.ltv_mode, cfg.get("extend", "ltv_mode")) {
                (Some(LtvModeArg::Direct), _) | (None, Some("direct")) => LtvMode::Direct,
                (Some(LtvModeArg::Match), _) | (None, None) | (None, Some("match")) => {
                    LtvMode::Match
                }
                (None, Some(other)) => bail!("unknown ltv_mode `{other}` in config"),
            };
            let options = ExtendOptions {
                exciter,
                ltv_mode,
                gain_ceiling_db: args
                    .gain_ceiling_db
                    .or(cfg.get_parsed("extend", "gain_ceiling_db")?)
                    .unwrap_or(DEFAULT_GAIN_CEILING_DB),
            };
            let manifest =
                require(args.manifest, cfg.get("extend", "manifest"), "extend manifest")?;
            let encoding = encoding_of(args.pcm16, cfg.get("extend", "encoding"))?;
            if let (Some(in_file), Some(out_file)) = (&args.in_file, &args.out_file) {
                let id = in_file
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .context("--in path has no usable file stem")?
                    .to_string();
                let input_dir =
                    in_file.parent().context("--in path has no parent directory")?.to_path_buf();
                let output_dir = out_file
                    .parent()
                    .map(PathBuf::from)
                    .filter(|p| !p.as_os_str().is_empty())
                    .unwrap_or_else(|| PathBuf::from("."));
                let opts = ExtendOpts {
                    input_dir,
                    output_dir: output_dir.clone(),
                    manifest,
                    predictor,
                    options,
                    encoding,
                    only: Some(id.clone()),
                };
                let outcome = cmd_extend(&opts)?;
                let produced = output_dir.join(format!("{id}.wav"));
                if outcome.errors.is_empty() && &produced != out_file {
                    std::fs::rename(&produced, out_file)
                        .with_context(|| format!("moving output to {}", out_file.display()))?;
                }
                return Ok(outcome_code(&outcome, "extend"));
            }
            let opts = ExtendOpts {
                input_dir: require(
                    args.input_dir,
                    cfg.get("extend", "input_dir"),
                    "extend input_dir",
                )?,
                output_dir: require(
                    args.output_dir,
                    cfg.get("extend", "output_dir"),
                    "extend output_dir",
                )?,
                manifest,
                predictor,
                options,
                encoding,
                only: None,
            };
            Ok(outcome_code(&cmd_extend(&opts)?, "extend"))
        }
        Command::TrainPredictor(args) => {
            let section = "train-predictor";
            let opts = TrainOpts {
                manifest: require(args.manifest, cfg.get(section, "manifest"), "train manifest")?,
                input_dir: require(
                    args.input_dir,
                    cfg.get(section, "input_dir"),
                    "train input_dir",
                )?,
                references_dir: require(
                    args.references_dir,
                    cfg.get(section, "references_dir"),
                    "train references_dir",
                )?,
                out: require(args.out, cfg.get(section, "out"), "train out")?,
                context: args.context.or(cfg.get_parsed(section, "context")?).unwrap_or(2),
                ridge: args.ridge.or(cfg.get_parsed(section, "ridge")?).unwrap_or(1e-3),
                sweep: args.sweep || cfg.get_parsed(section, "sweep")?.unwrap_or(false),
            };
            let outcome = cmd_train(&opts)?;
            eprintln!(
                "trained on {} utterances (validation {}), ridge {}",
                outcome.train_ids.len(),
                outcome.validation_ids.len(),
                outcome.chosen_ridge
            );
            for (lambda, loss) in &outcome.sweep_losses {
                eprintln!("  lambda {lambda:>8}: validation L1 {loss:.6}");
            }
            Ok(0)
        }
        Command::Evaluate(args) => {
            let opts = EvaluateOpts {
                manifest: require(
                    args.manifest,
                    cfg.get("evaluate", "manifest"),
                    "evaluate manifest",
                )?,
                estimates_dir: require(
                    args.estimates_dir,
                    cfg.get("evaluate", "estimates_dir"),
                    "evaluate estimates_dir",
                )?,
                references_dir: require(
                    args.references_dir,
                    cfg.get("evaluate", "references_dir"),
                    "evaluate references_dir",
                )?,
                report: args.report.or_else(|| cfg.get("evaluate", "report").map(PathBuf::from)),
                csv: args.csv || cfg.get_parsed("evaluate", "csv")?.unwrap_or(false),
            };
            let eval = cmd_evaluate(&opts)?;
            for (id, msg) in &eval.errors {
                eprintln!("error: evaluate {id}: {msg}");
            }
            Ok(u8::from(!eval.errors.is_empty()))
        }
        Command::Features(args) => {
            let opts = FeaturesOpts {
                input: require(args.input, cfg.get("features", "input"), "features input")?,
                out: require(args.out, cfg.get("features", "out"), "features out")?,
                csv: args.csv || cfg.get_parsed("features", "csv")?.unwrap_or(false),
                spectrogram: args.spectrogram
                    || cfg.get_parsed("features", "spectrogram")?.unwrap_or(false),
            };
            cmd_features(&opts)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
