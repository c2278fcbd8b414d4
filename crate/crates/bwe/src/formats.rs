//! Binary artifact formats, all little-endian:
//! - "BWESPEC1": u32 frames T, u32 bins B, then T*B f64 magnitudes row-major
//! - "BWEFEAT1": u32 frames T, u32 bands K, then T*K f64 features row-major
//! - "BWELTV01": u32 K, u32 k, u32 c, f64 lambda, u64 config hash, then
//!   (K-k)*(K*(2c+1)+1) f64 weights row-major

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use bwe_core::features::CoarseSpectrum;
use bwe_core::predict::PredictorModel;
use bwe_core::stft::MagnitudeSpectrogram;

const SPEC_MAGIC: &[u8; 8] = b"BWESPEC1";
const FEAT_MAGIC: &[u8; 8] = b"BWEFEAT1";
const MODEL_MAGIC: &[u8; 8] = b"BWELTV01";

fn write_matrix(w: &mut impl Write, rows: &[Vec<f64>]) -> Result<()> {
    for row in rows {
        for &v in row {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    Ok(())
}

fn read_matrix(r: &mut impl Read, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut row = Vec::with_capacity(cols);
        for _ in 0..cols {
            row.push(r.read_f64::<LittleEndian>()?);
        }
        out.push(row);
    }
    Ok(out)
}

fn expect_magic(r: &mut impl Read, magic: &[u8; 8], what: &str) -> Result<()> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got)?;
    if &got != magic {
        bail!("not a {what} file (bad magic)");
    }
    Ok(())
}

pub fn write_spectrogram(mag: &MagnitudeSpectrogram, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SPEC_MAGIC)?;
    let t = mag.frames.len() as u32;
    let b = mag.frames.first().map_or(0, Vec::len) as u32;
    w.write_u32::<LittleEndian>(t)?;
    w.write_u32::<LittleEndian>(b)?;
    write_matrix(&mut w, &mag.frames)?;
    w.flush().context("writing spectrogram dump")
}

/// Returns the raw T x B matrix; geometry metadata is not stored in the dump.
pub fn read_spectrogram(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = BufReader::new(File::open(path)?);
    expect_magic(&mut r, SPEC_MAGIC, "spectrogram")?;
    let t = r.read_u32::<LittleEndian>()? as usize;
    let b = r.read_u32::<LittleEndian>()? as usize;
    read_matrix(&mut r, t, b)
}

pub fn write_features(coarse: &CoarseSpectrum, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FEAT_MAGIC)?;
    w.write_u32::<LittleEndian>(coarse.frames.len() as u32)?;
    w.write_u32::<LittleEndian>(coarse.band_count as u32)?;
    write_matrix(&mut w, &coarse.frames)?;
    w.flush().context("writing feature dump")
}

pub fn read_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = BufReader::new(File::open(path)?);
    expect_magic(&mut r, FEAT_MAGIC, "feature")?;
    let t = r.read_u32::<LittleEndian>()? as usize;
    let k = r.read_u32::<LittleEndian>()? as usize;
    read_matrix(&mut r, t, k)
}

/// CSV variant of the feature dump: one frame per line.
pub fn write_features_csv(coarse: &CoarseSpectrum, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in &coarse.frames {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush().context("writing feature CSV")
}

pub fn write_model(model: &PredictorModel, path: &Path) -> Result<()> {
    model.validate().context("refusing to write invalid model")?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MODEL_MAGIC)?;
    w.write_u32::<LittleEndian>(model.band_count as u32)?;
    w.write_u32::<LittleEndian>(model.cutoff_band as u32)?;
    w.write_u32::<LittleEndian>(model.context_radius as u32)?;
    w.write_f64::<LittleEndian>(model.ridge)?;
    w.write_u64::<LittleEndian>(model.config_hash)?;
    write_matrix(&mut w, &model.weights)?;
    w.flush().context("writing model file")
}

pub fn read_model(path: &Path) -> Result<PredictorModel> {
    let mut r = BufReader::new(File::open(path)?);
    expect_magic(&mut r, MODEL_MAGIC, "predictor model")?;
    let band_count = r.read_u32::<LittleEndian>()? as usize;
    let cutoff_band = r.read_u32::<LittleEndian>()? as usize;
    let context_radius = r.read_u32::<LittleEndian>()? as usize;
    let ridge = r.read_f64::<LittleEndian>()?;
    let config_hash = r.read_u64::<LittleEndian>()?;
    if cutoff_band >= band_count {
        bail!("model cutoff band {cutoff_band} out of range for K={band_count}");
    }
    let rows = band_count - cutoff_band;
    let cols = band_count * (2 * context_radius + 1) + 1;
    let weights = read_matrix(&mut r, rows, cols)?;
    let model = PredictorModel {
        band_count,
        cutoff_band,
        context_radius,
        ridge,
        config_hash,
        weights,
    };
    model.validate().context("model file failed validation")?;
    Ok(model)
}
