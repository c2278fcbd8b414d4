//! Per-utterance metric reports and corpus evaluation.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use bwe_core::degrade::DegradationRecord;
use bwe_core::features::default_grouping;
use bwe_core::metrics::{band_energy_db, coarse_loss_hi, mel_l1, stoi};
use bwe_core::Signal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::wav::read_wav;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricReport {
    pub utterance_id: String,
    pub mel_l1: f64,
    /// Clamped to [0, 1] for reporting; raw correlations may dip below 0.
    pub stoi: f64,
    pub coarse_loss_hi: f64,
    pub upper_band_energy_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub utterances: usize,
    pub errors: usize,
    pub mel_l1_mean: f64,
    pub stoi_mean: f64,
    pub coarse_loss_hi_mean: f64,
    pub upper_band_energy_db_mean: f64,
}

#[derive(Debug)]
pub struct CorpusEvaluation {
    pub reports: Vec<MetricReport>,
    /// (utterance_id, error message) for utterances that failed; these are
    /// excluded from the summary means.
    pub errors: Vec<(String, String)>,
    pub summary: Summary,
}

fn pad_to(signal: &Signal, len: usize) -> Signal {
    let mut samples = signal.samples.clone();
    samples.resize(len.max(samples.len()), 0.0);
    Signal { samples, sample_rate: signal.sample_rate }
}

/// Metrics for one utterance. The shorter signal is zero-padded so the
/// frame grids line up.
pub fn evaluate_utterance(
    record: &DegradationRecord,
    reference: &Signal,
    estimate: &Signal,
) -> Result<MetricReport> {
    let len = reference.len().max(estimate.len());
    let reference = pad_to(reference, len);
    let estimate = pad_to(estimate, len);
    let g = default_grouping();
    let k = record.cutoff_band_k;
    let edge_hz = {
        let cfg = bwe_core::stft::StftConfig::default_48k();
        g.band_edges()[k] as f64 * cfg.bin_hz()
    };
    Ok(MetricReport {
        utterance_id: record.utterance_id.clone(),
        mel_l1: mel_l1(&reference, &estimate)?,
        stoi: stoi(&reference, &estimate)?.clamp(0.0, 1.0),
        coarse_loss_hi: coarse_loss_hi(&reference, &estimate, &g, k)?,
        upper_band_energy_db: band_energy_db(&estimate, edge_hz, 24000.0)?,
    })
}

fn summarize(reports: &[MetricReport], errors: usize) -> Summary {
    let n = reports.len();
    let mean = |f: fn(&MetricReport) -> f64| {
        if n == 0 {
            0.0
        } else {
            reports.iter().map(f).sum::<f64>() / n as f64
        }
    };
    Summary {
        utterances: n,
        errors,
        mel_l1_mean: mean(|r| r.mel_l1),
        stoi_mean: mean(|r| r.stoi),
        coarse_loss_hi_mean: mean(|r| r.coarse_loss_hi),
        upper_band_energy_db_mean: mean(|r| r.upper_band_energy_db),
    }
}

/// Evaluates `estimates_dir/{id}.wav` against `references_dir/{id}.wav`
/// for every manifest record. Parallel over utterances; output order is
/// the manifest's sorted-id order regardless of worker count.
pub fn evaluate_corpus(
    records: &[DegradationRecord],
    estimates_dir: &Path,
    references_dir: &Path,
) -> CorpusEvaluation {
    let results: Vec<(String, Result<MetricReport>)> = records
        .par_iter()
        .map(|record| {
            let id = record.utterance_id.clone();
            let run = || -> Result<MetricReport> {
                let reference = read_wav(&references_dir.join(format!("{id}.wav")))?;
                let estimate = read_wav(&estimates_dir.join(format!("{id}.wav")))?;
                reference.expect_rate(48000).context("reference must be 48 kHz")?;
                estimate.expect_rate(48000).context("estimate must be 48 kHz")?;
                evaluate_utterance(record, &reference, &estimate)
            };
            let res = run();
            (id, res)
        })
        .collect();
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for (id, res) in results {
        match res {
            Ok(r) => reports.push(r),
            Err(e) => errors.push((id, format!("{e:#}"))),
        }
    }
    let summary = summarize(&reports, errors.len());
    CorpusEvaluation { reports, errors, summary }
}

/// JSON lines: one report per utterance, then one summary object tagged
/// with `"summary"`.
pub fn write_report_jsonl(eval: &CorpusEvaluation, out: &mut impl Write) -> Result<()> {
    for r in &eval.reports {
        serde_json::to_writer(&mut *out, r)?;
        writeln!(out)?;
    }
    for (id, msg) in &eval.errors {
        serde_json::to_writer(&mut *out, &serde_json::json!({ "utterance_id": id, "error": msg }))?;
        writeln!(out)?;
    }
    serde_json::to_writer(&mut *out, &serde_json::json!({ "summary": eval.summary }))?;
    writeln!(out)?;
    Ok(())
}

pub fn write_report_csv(eval: &CorpusEvaluation, out: &mut impl Write) -> Result<()> {
    writeln!(out, "utterance_id,mel_l1,stoi,coarse_loss_hi,upper_band_energy_db")?;
    for r in &eval.reports {
        writeln!(
            out,
            "{},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.utterance_id, r.mel_l1, r.stoi, r.coarse_loss_hi, r.upper_band_energy_db
        )?;
    }
    Ok(())
}
