//! Zero-phase linear time-varying filtering plus the residual-connection
//! band mixing.
//!
//! The filter multiplies each STFT frame by real non-negative per-bin gains,
//! leaving phase untouched. In `match` mode the gains are the ratio of the
//! target response to the excitation's own coarse-decompressed envelope, so
//! the output envelope lands on the target regardless of excitation level.

use alloc::vec;

use crate::error::{Error, Result};
use crate::features::{compress, decompress, CoarseSpectrum, GroupingMatrix};
use crate::signal::Signal;
use crate::stft::{istft, magnitude, stft, MagnitudeSpectrogram};

/// Regularizer in the match-mode denominator.
const MATCH_DELTA: f64 = 1e-8;
/// Default per-bin gain ceiling in dB for match mode.
pub const DEFAULT_GAIN_CEILING_DB: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtvMode {
    /// Apply the response directly as the magnitude gain.
    Direct,
    /// Divide by the excitation envelope so the output matches the response.
    Match,
}

/// Fine-resolution non-negative target magnitudes per frame.
#[derive(Debug, Clone)]
pub struct LtvResponse {
    pub mag: MagnitudeSpectrogram,
    pub mode: LtvMode,
}

impl LtvResponse {
    pub fn num_frames(&self) -> usize {
        self.mag.frames.len()
    }
}

/// Expands a coarse target through the pseudoinverse into the filter
/// response; non-negative and piecewise-constant across each band.
pub fn build_response(
    target: &CoarseSpectrum,
    g: &GroupingMatrix,
    mode: LtvMode,
) -> Result<LtvResponse> {
    Ok(LtvResponse { mag: decompress(target, g)?, mode })
}

/// Applies the per-frame zero-phase gains. Bins below the cutoff band's
/// lower edge get gain 0 (the residual path carries the passband); pass
/// `None` to disable the cutoff.
pub fn apply_ltv(
    excited: &Signal,
    response: &LtvResponse,
    cutoff_band: Option<usize>,
    g: &GroupingMatrix,
    gain_ceiling_db: f64,
) -> Result<Signal> {
    excited.expect_rate(response.mag.config.sample_rate)?;
    let config = response.mag.config;
    let mut spec = stft(excited, &config)?;
    if spec.frames.len() != response.num_frames() {
        return Err(Error::Contract("response frame count does not match excitation"));
    }
    let bins = config.num_bins();
    let cutoff_bin = match cutoff_band {
        Some(k) => {
            if k >= g.band_count() {
                return Err(Error::Contract("cutoff band out of range"));
            }
            g.band_edges()[k]
        }
        None => 0,
    };
    let gain_cap = libm::pow(10.0, gain_ceiling_db / 20.0);
    let envelope = match response.mode {
        LtvMode::Match => {
            let coarse = compress(&magnitude(&spec), g)?;
            Some(decompress(&coarse, g)?)
        }
        LtvMode::Direct => None,
    };
    for (t, frame) in spec.frames.iter_mut().enumerate() {
        let resp = &response.mag.frames[t];
        if resp.len() != bins {
            return Err(Error::Contract("response bin count does not match config"));
        }
        for (bin, v) in frame.iter_mut().enumerate() {
            if bin < cutoff_bin {
                *v = num_complex::Complex64::new(0.0, 0.0);
                continue;
            }
            let gain = match &envelope {
                Some(env) => (resp[bin] / (env.frames[t][bin] + MATCH_DELTA)).min(gain_cap),
                None => resp[bin],
            };
            *v *= gain;
        }
    }
    istft(&spec)
}

/// Residual connection: samplewise sum of the upsampled input and the
/// filtered excitation.
pub fn residual_mix(upsampled_input: &Signal, filtered: &Signal) -> Result<Signal> {
    if upsampled_input.len() != filtered.len() {
        return Err(Error::Contract("residual mix requires equal lengths"));
    }
    if upsampled_input.sample_rate != filtered.sample_rate {
        return Err(Error::Contract("residual mix requires matching rates"));
    }
    Signal::new(
        upsampled_input
            .samples
            .iter()
            .zip(&filtered.samples)
            .map(|(a, b)| a + b)
            .collect(),
        upsampled_input.sample_rate,
    )
}

/// Convenience: a constant all-ones direct response matching a signal length.
pub fn unit_response(config: &crate::stft::StftConfig, num_samples: usize) -> LtvResponse {
    let t = config.num_frames(num_samples);
    LtvResponse {
        mag: MagnitudeSpectrogram {
            frames: vec![vec![1.0; config.num_bins()]; t],
            config: *config,
            num_samples,
        },
        mode: LtvMode::Direct,
    }
}
