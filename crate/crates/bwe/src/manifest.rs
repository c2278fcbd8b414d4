//! Degradation manifest: JSON lines, one record per utterance with fields
//! {id, f_lo, f_hi, seed, k}. Records are kept sorted by id so re-runs are
//! byte-identical regardless of processing order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use bwe_core::degrade::DegradationRecord;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct ManifestLine {
    id: String,
    f_lo: f64,
    f_hi: f64,
    seed: u64,
    k: usize,
}

impl From<&DegradationRecord> for ManifestLine {
    fn from(r: &DegradationRecord) -> Self {
        ManifestLine {
            id: r.utterance_id.clone(),
            f_lo: r.f_lo,
            f_hi: r.f_hi,
            seed: r.seed,
            k: r.cutoff_band_k,
        }
    }
}

impl From<ManifestLine> for DegradationRecord {
    fn from(l: ManifestLine) -> Self {
        DegradationRecord {
            utterance_id: l.id,
            f_lo: l.f_lo,
            f_hi: l.f_hi,
            seed: l.seed,
            cutoff_band_k: l.k,
        }
    }
}

pub fn write_manifest(records: &[DegradationRecord], path: &Path) -> Result<()> {
    let mut sorted: Vec<&DegradationRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.utterance_id.cmp(&b.utterance_id));
    let mut w = BufWriter::new(File::create(path)?);
    for r in sorted {
        serde_json::to_writer(&mut w, &ManifestLine::from(r))?;
        writeln!(w)?;
    }
    w.flush().with_context(|| format!("writing manifest {}", path.display()))
}

pub fn read_manifest(path: &Path) -> Result<Vec<DegradationRecord>> {
    let r = BufReader::new(
        File::open(path).with_context(|| format!("opening manifest {}", path.display()))?,
    );
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ManifestLine = serde_json::from_str(&line)
            .with_context(|| format!("{}: bad manifest line {}", path.display(), i + 1))?;
        let record: DegradationRecord = parsed.into();
        record
            .validate()
            .with_context(|| format!("{}: invalid record on line {}", path.display(), i + 1))?;
        out.push(record);
    }
    for pair in out.windows(2) {
        if pair[0].utterance_id == pair[1].utterance_id {
            bail!("{}: duplicate utterance id {}", path.display(), pair[0].utterance_id);
        }
    }
    out.sort_by(|a, b| a.utterance_id.cmp(&b.utterance_id));
    Ok(out)
}
