//! Objective metrics: log-mel L1, STOI, and band-energy diagnostics.

use crate::error::{Error, Result};
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::features::{compress, log_mel, GroupingMatrix};
use crate::fft::Dft;
use crate::predict::feature_loss;
use crate::signal::Signal;
use crate::stft::{magnitude, stft, StftConfig};

pub mod stoi;

pub use stoi::stoi;

/// Sentinel for the band energy of a silent signal.
pub const SILENCE_DB: f64 = -200.0;

/// Mean absolute difference of 80-band log-mel features. Signals must be at
/// 48 kHz; the shorter one is zero-padded to the longer length.
pub fn mel_l1(reference: &Signal, estimate: &Signal) -> Result<f64> {
    reference.expect_rate(48000)?;
    estimate.expect_rate(48000)?;
    if reference.is_empty() || estimate.is_empty() {
        return Err(Error::Contract("mel_l1 requires non-empty signals"));
    }
    let len = reference.len().max(estimate.len());
    let pad = |s: &Signal| {
        let mut v = s.samples.clone();
        v.resize(len, 0.0);
        Signal { samples: v, sample_rate: 48000 }
    };
    let config = StftConfig::default_48k();
    let mr = log_mel(&magnitude(&stft(&pad(reference), &config)?))?;
    let me = log_mel(&magnitude(&stft(&pad(estimate), &config)?))?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (a, b) in mr.frames.iter().zip(&me.frames) {
        for (x, y) in a.iter().zip(b) {
            sum += libm::fabs(x - y);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Contract("mel_l1 requires at least one frame"));
    }
    Ok(sum / count as f64)
}

/// Ratio of energy inside [f_low, f_high] to total energy, in dB.
pub fn band_energy_db(signal: &Signal, f_low: f64, f_high: f64) -> Result<f64> {
    let nyquist = signal.sample_rate as f64 / 2.0;
    if f_low >= f_high || f_high > nyquist {
        return Err(Error::Contract("band must satisfy f_low < f_high <= Nyquist"));
    }
    if signal.is_empty() {
        return Err(Error::Contract("band_energy_db requires a non-empty signal"));
    }
    // exact-length DFT: no zero padding, so a signal that is bandlimited on
    // its own grid measures with zero out-of-band energy instead of the
    // splatter a padded or windowed transform would introduce
    let n = signal.len();
    let plan = Dft::new(n)?;
    let mut buf: Vec<Complex64> =
        signal.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut buf);
    let mut band = 0.0;
    let mut total = 0.0;
    for (bin, v) in buf.iter().enumerate() {
        let idx = bin.min(n - bin);
        let f = idx as f64 * signal.sample_rate as f64 / n as f64;
        let e = v.norm_sqr();
        total += e;
        if f >= f_low && f <= f_high {
            band += e;
        }
    }
    if total <= 0.0 {
        return Ok(SILENCE_DB);
    }
    let ratio = band / total;
    if ratio <= 0.0 {
        return Ok(SILENCE_DB);
    }
    Ok((10.0 * libm::log10(ratio)).max(SILENCE_DB))
}

/// Eq-style coarse feature loss between two 48 kHz signals over bands >= k.
pub fn coarse_loss_hi(
    reference: &Signal,
    estimate: &Signal,
    grouping: &GroupingMatrix,
    cutoff_band: usize,
) -> Result<f64> {
    reference.expect_rate(48000)?;
    estimate.expect_rate(48000)?;
    let len = reference.len().max(estimate.len());
    let pad = |s: &Signal| {
        let mut v = s.samples.clone();
        v.resize(len, 0.0);
        Signal { samples: v, sample_rate: 48000 }
    };
    let config = StftConfig::default_48k();
    let yr = compress(&magnitude(&stft(&pad(reference), &config)?), grouping)?;
    let ye = compress(&magnitude(&stft(&pad(estimate), &config)?), grouping)?;
    feature_loss(&yr, &ye, cutoff_band)
}

/// Helper shared by tests: relative L2 distance between two sample slices.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - y) * (x - y);
        den += x * x;
    }
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    libm::sqrt(num / den)
}
