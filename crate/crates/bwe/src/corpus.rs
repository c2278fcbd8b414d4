//! Batch subcommand implementations. Every command is deterministic for a
//! fixed config: work is parallel over utterances, each utterance seeded
//! from its id, and outputs merged in sorted-id order.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bwe_core::degrade::{degrade_to_8k, sample_record, DegradationRecord};
use bwe_core::excite::ExciterKind;
use bwe_core::features::{default_grouping, feature_config_hash};
use bwe_core::pipeline::{
    baseline, coarse_features, extend, ridge_sweep_grid, split_train_validation, ExtendOptions,
    Predictor,
};
use bwe_core::predict::{feature_loss, predict, train_ridge, FeaturePair, PredictorModel};
use bwe_core::resample::upsample_6x;
use bwe_core::rng::utterance_seed;
use bwe_core::stft::{magnitude, stft, StftConfig};
use bwe_core::Signal;
use rayon::prelude::*;

use crate::config::RunLock;
use crate::formats;
use crate::manifest::{read_manifest, write_manifest};
use crate::report::{evaluate_corpus, CorpusEvaluation};
use crate::wav::{read_wav, write_wav, WavEncoding};

/// Sorted utterance ids for every `*.wav` directly inside `dir`.
pub fn list_wav_ids(dir: &Path) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    for entry in
        std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))?
    {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("wav") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

fn pad_to(signal: &Signal, len: usize) -> Signal {
    let mut samples = signal.samples.clone();
    samples.resize(len.max(samples.len()), 0.0);
    Signal { samples, sample_rate: signal.sample_rate }
}

#[derive(Debug, Clone)]
pub struct DegradeOpts {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub manifest: PathBuf,
    pub seed: u64,
    pub encoding: WavEncoding,
}

pub struct BatchOutcome {
    pub processed: usize,
    /// (utterance_id, error message); non-empty means partial failure.
    pub errors: Vec<(String, String)>,
}

pub fn cmd_degrade(opts: &DegradeOpts) -> Result<BatchOutcome> {
    let ids = list_wav_ids(&opts.input_dir)?;
    std::fs::create_dir_all(&opts.output_dir)?;
    if ids.is_empty() {
        eprintln!("warning: no .wav files in {}", opts.input_dir.display());
    }
    let results: Vec<(String, Result<DegradationRecord>)> = ids
        .par_iter()
        .map(|id| {
            let run = || -> Result<DegradationRecord> {
                let signal = read_wav(&opts.input_dir.join(format!("{id}.wav")))?;
                signal.expect_rate(48000).context("degrade input must be 48 kHz")?;
                let record = sample_record(opts.seed, id);
                let degraded = degrade_to_8k(&signal, &record)?;
                write_wav(&degraded, &opts.output_dir.join(format!("{id}.wav")), opts.encoding)?;
                Ok(record)
            };
            let res = run();
            (id.clone(), res)
        })
        .collect();
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (id, res) in results {
        match res {
            Ok(r) => records.push(r),
            Err(e) => errors.push((id, format!("{e:#}"))),
        }
    }
    write_manifest(&records, &opts.manifest)?;
    let mut lock = RunLock::new("degrade");
    lock.set("seed", opts.seed);
    lock.set("input_dir", opts.input_dir.display());
    lock.set("manifest", opts.manifest.display());
    lock.write_to(&opts.output_dir)?;
    Ok(BatchOutcome { processed: records.len(), errors })
}

#[derive(Debug, Clone)]
pub enum PredictorSpec {
    /// Ground-truth envelopes from `references_dir/{id}.wav`.
    Oracle { references_dir: PathBuf },
    Model { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct ExtendOpts {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub manifest: PathBuf,
    pub predictor: PredictorSpec,
    pub options: ExtendOptions,
    pub encoding: WavEncoding,
    /// Restrict to a single utterance id (single-file mode).
    pub only: Option<String>,
}

/// Per-utterance exciter seeding: noise exciters derive their seed from the
/// base seed and the utterance id, so outputs are independent of batch
/// order, worker count, and corpus composition.
fn per_utterance_options(base: &ExtendOptions, id: &str) -> ExtendOptions {
    let mut opts = base.clone();
    if let ExciterKind::Noise { seed, flat_level } = opts.exciter {
        opts.exciter = ExciterKind::Noise { seed: utterance_seed(seed, id), flat_level };
    }
    opts
}

pub fn cmd_extend(opts: &ExtendOpts) -> Result<BatchOutcome> {
    let mut records = read_manifest(&opts.manifest)?;
    if let Some(only) = &opts.only {
        records.retain(|r| &r.utterance_id == only);
        if records.is_empty() {
            bail!("utterance `{only}` not present in manifest");
        }
    }
    // resolve the predictor fully before any output is written
    let model: Option<PredictorModel> = match &opts.predictor {
        PredictorSpec::Oracle { references_dir } => {
            if !references_dir.is_dir() {
                bail!("oracle predictor requires a references directory");
            }
            None
        }
        PredictorSpec::Model { path } => {
            let model = formats::read_model(path)?;
            let g = default_grouping();
            let cfg = StftConfig::default_48k();
            for r in &records {
                let hash = feature_config_hash(&cfg, &g, r.cutoff_band_k);
                if hash != model.config_hash {
                    bail!(
                        "model config hash {:#x} does not match manifest record {} ({:#x})",
                        model.config_hash,
                        r.utterance_id,
                        hash
                    );
                }
            }
            Some(model)
        }
    };
    std::fs::create_dir_all(&opts.output_dir)?;
    let results: Vec<(String, Result<()>)> = records
        .par_iter()
        .map(|record| {
            let id = record.utterance_id.clone();
            let run = || -> Result<()> {
                let input = read_wav(&opts.input_dir.join(format!("{id}.wav")))?;
                input.expect_rate(8000).context("extend input must be 8 kHz")?;
                let options = per_utterance_options(&opts.options, &id);
                let reference;
                let predictor = match (&opts.predictor, &model) {
                    (PredictorSpec::Oracle { references_dir }, _) => {
                        let raw = read_wav(&references_dir.join(format!("{id}.wav")))?;
                        raw.expect_rate(48000).context("reference must be 48 kHz")?;
                        reference = pad_to(&raw, 6 * input.len());
                        Predictor::Oracle(&reference)
                    }
                    (PredictorSpec::Model { .. }, Some(m)) => Predictor::Model(m),
                    (PredictorSpec::Model { .. }, None) => unreachable!(),
                };
                let extended = extend(&input, predictor, record, &options)?;
                write_wav(&extended, &opts.output_dir.join(format!("{id}.wav")), opts.encoding)
            };
            let res = run();
            (id, res)
        })
        .collect();
    let errors: Vec<(String, String)> = results
        .into_iter()
        .filter_map(|(id, res)| res.err().map(|e| (id, format!("{e:#}"))))
        .collect();
    let mut lock = RunLock::new("extend");
    lock.set("manifest", opts.manifest.display());
    lock.set(
        "predictor",
        match &opts.predictor {
            PredictorSpec::Oracle { .. } => "oracle".to_string(),
            PredictorSpec::Model { path } => path.display().to_string(),
        },
    );
    lock.set("exciter", format!("{:?}", opts.options.exciter));
    lock.set("ltv_mode", format!("{:?}", opts.options.ltv_mode));
    lock.set("gain_ceiling_db", opts.options.gain_ceiling_db);
    lock.write_to(&opts.output_dir)?;
    Ok(BatchOutcome { processed: records.len() - errors.len(), errors })
}

/// The upsample-only baseline corpus, for A/B comparisons against extend.
pub fn cmd_baseline(
    input_dir: &Path,
    output_dir: &Path,
    manifest: &Path,
    encoding: WavEncoding,
) -> Result<BatchOutcome> {
    let records = read_manifest(manifest)?;
    std::fs::create_dir_all(output_dir)?;
    let results: Vec<(String, Result<()>)> = records
        .par_iter()
        .map(|record| {
            let id = record.utterance_id.clone();
            let run = || -> Result<()> {
                let input = read_wav(&input_dir.join(format!("{id}.wav")))?;
                input.expect_rate(8000).context("baseline input must be 8 kHz")?;
                write_wav(&baseline(&input)?, &output_dir.join(format!("{id}.wav")), encoding)
            };
            let res = run();
            (id, res)
        })
        .collect();
    let errors: Vec<(String, String)> = results
        .into_iter()
        .filter_map(|(id, res)| res.err().map(|e| (id, format!("{e:#}"))))
        .collect();
    Ok(BatchOutcome { processed: records.len() - errors.len(), errors })
}

#[derive(Debug, Clone)]
pub struct TrainOpts {
    pub manifest: PathBuf,
    pub input_dir: PathBuf,
    pub references_dir: PathBuf,
    pub out: PathBuf,
    pub context: usize,
    pub ridge: f64,
    pub sweep: bool,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub model: PredictorModel,
    pub chosen_ridge: f64,
    pub train_ids: Vec<String>,
    pub validation_ids: Vec<String>,
    /// (lambda, validation L1 loss) for every candidate evaluated.
    pub sweep_losses: Vec<(f64, f64)>,
}

fn build_pair(
    record: &DegradationRecord,
    input_dir: &Path,
    references_dir: &Path,
) -> Result<FeaturePair> {
    let id = &record.utterance_id;
    let input = read_wav(&input_dir.join(format!("{id}.wav")))?;
    input.expect_rate(8000).context("training input must be 8 kHz")?;
    let reference = read_wav(&references_dir.join(format!("{id}.wav")))?;
    reference.expect_rate(48000).context("training reference must be 48 kHz")?;
    let upsampled = upsample_6x(&input)?;
    let reference = pad_to(&reference, upsampled.len());
    let g = default_grouping();
    let pair = FeaturePair {
        x_features: coarse_features(&upsampled, &g)?,
        y_features: coarse_features(&reference, &g)?,
        record: record.clone(),
    };
    pair.validate()?;
    Ok(pair)
}

fn mean_validation_loss(model: &PredictorModel, pairs: &[FeaturePair], hash: u64) -> Result<f64> {
    let mut total = 0.0;
    for pair in pairs {
        let predicted = predict(model, &pair.x_features, hash)?;
        total += feature_loss(&pair.y_features, &predicted, pair.record.cutoff_band_k)?;
    }
    Ok(total / pairs.len() as f64)
}

pub fn cmd_train(opts: &TrainOpts) -> Result<TrainOutcome> {
    let records = read_manifest(&opts.manifest)?;
    if records.is_empty() {
        bail!("manifest {} is empty", opts.manifest.display());
    }
    let ids: Vec<String> = records.iter().map(|r| r.utterance_id.clone()).collect();
    let (train_ids, validation_ids) = split_train_validation(&ids);
    let pairs: Vec<FeaturePair> = records
        .par_iter()
        .map(|r| build_pair(r, &opts.input_dir, &opts.references_dir))
        .collect::<Result<_>>()?;
    let by_id = |wanted: &[String]| -> Vec<FeaturePair> {
        pairs
            .iter()
            .filter(|p| wanted.contains(&p.record.utterance_id))
            .cloned()
            .collect()
    };
    let train_pairs = by_id(&train_ids);
    let validation_pairs = by_id(&validation_ids);
    let g = default_grouping();
    let cfg = StftConfig::default_48k();
    let hash = feature_config_hash(&cfg, &g, records[0].cutoff_band_k);
    let (model, chosen_ridge, sweep_losses) = if opts.sweep && !validation_pairs.is_empty() {
        let mut best: Option<(PredictorModel, f64, f64)> = None;
        let mut losses = Vec::new();
        for &lambda in &ridge_sweep_grid() {
            let candidate = train_ridge(&train_pairs, opts.context, lambda, hash)?;
            let loss = mean_validation_loss(&candidate, &validation_pairs, hash)?;
            losses.push((lambda, loss));
            let better = match &best {
                None => true,
                Some((_, _, best_loss)) => loss < *best_loss,
            };
            if better {
                best = Some((candidate, lambda, loss));
            }
        }
        let (model, lambda, _) = best.expect("sweep grid is non-empty");
        (model, lambda, losses)
    } else {
        let model = train_ridge(&train_pairs, opts.context, opts.ridge, hash)?;
        let losses = if validation_pairs.is_empty() {
            Vec::new()
        } else {
            vec![(opts.ridge, mean_validation_loss(&model, &validation_pairs, hash)?)]
        };
        (model, opts.ridge, losses)
    };
    formats::write_model(&model, &opts.out)?;
    if let Some(dir) = opts.out.parent() {
        if dir.as_os_str().is_empty() || dir.is_dir() {
            let dir = if dir.as_os_str().is_empty() { Path::new(".") } else { dir };
            let mut lock = RunLock::new("train-predictor");
            lock.set("manifest", opts.manifest.display());
            lock.set("context", opts.context);
            lock.set("ridge", chosen_ridge);
            lock.set("sweep", opts.sweep);
            lock.set("train_utterances", train_ids.len());
            lock.set("validation_utterances", validation_ids.len());
            lock.write_to(dir)?;
        }
    }
    Ok(TrainOutcome { model, chosen_ridge, train_ids, validation_ids, sweep_losses })
}

#[derive(Debug, Clone)]
pub struct EvaluateOpts {
    pub manifest: PathBuf,
    pub estimates_dir: PathBuf,
    pub references_dir: PathBuf,
    pub report: Option<PathBuf>,
    pub csv: bool,
}

pub fn cmd_evaluate(opts: &EvaluateOpts) -> Result<CorpusEvaluation> {
    let records = read_manifest(&opts.manifest)?;
    let eval = evaluate_corpus(&records, &opts.estimates_dir, &opts.references_dir);
    let mut buf: Vec<u8> = Vec::new();
    if opts.csv {
        crate::report::write_report_csv(&eval, &mut buf)?;
    } else {
        crate::report::write_report_jsonl(&eval, &mut buf)?;
    }
    match &opts.report {
        Some(path) => std::fs::write(path, &buf)
            .with_context(|| format!("writing report {}", path.display()))?,
        None => {
            use std::io::Write as _;
            std::io::stdout().write_all(&buf)?;
        }
    }
    Ok(eval)
}

#[derive(Debug, Clone)]
pub struct FeaturesOpts {
    pub input: PathBuf,
    pub out: PathBuf,
    pub csv: bool,
    /// Dump the full magnitude spectrogram instead of coarse features.
    pub spectrogram: bool,
}

pub fn cmd_features(opts: &FeaturesOpts) -> Result<()> {
    let signal = read_wav(&opts.input)?;
    signal.expect_rate(48000).context("feature extraction expects 48 kHz input")?;
    let cfg = StftConfig::default_48k();
    if opts.spectrogram {
        if opts.csv {
            bail!("spectrogram dumps are binary only");
        }
        let mag = magnitude(&stft(&signal, &cfg)?);
        return formats::write_spectrogram(&mag, &opts.out);
    }
    let coarse = coarse_features(&signal, &default_grouping())?;
    if opts.csv {
        formats::write_features_csv(&coarse, &opts.out)
    } else {
        formats::write_features(&coarse, &opts.out)
    }
}
