//! STFT analysis and inverse-STFT synthesis on the fixed 2048/512 grid.
//!
//! Frames are center-aligned: the signal is zero-padded by fft_size/2 on
//! each side and frame t is centered at sample t*hop. Synthesis overlap-adds
//! with the same window and divides by the accumulated squared-window
//! envelope, which makes analysis/synthesis an exact identity away from the
//! boundaries.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{real_forward, real_inverse, Fft};
use crate::signal::Signal;
use crate::window::hann_periodic;

/// Analysis geometry. The pipeline uses the 48 kHz default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub fft_size: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl StftConfig {
    /// 2048-point STFT, 512-sample hop at 48 kHz (93.75 Hz frame rate).
    pub fn default_48k() -> Self {
        StftConfig { fft_size: 2048, hop: 512, sample_rate: 48000 }
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Width of one FFT bin in Hz (23.4375 Hz for the default config).
    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / self.fft_size as f64
    }

    pub fn num_frames(&self, num_samples: usize) -> usize {
        if num_samples == 0 {
            0
        } else {
            (num_samples + self.fft_size).div_ceil(self.hop)
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.fft_size.is_power_of_two() || self.hop == 0 || self.fft_size % self.hop != 0 {
            return Err(Error::Contract("fft_size must be a power of two and a multiple of hop"));
        }
        Ok(())
    }
}

/// T x B complex STFT frames (B = fft_size/2 + 1).
#[derive(Debug, Clone)]
pub struct ComplexSpectrogram {
    pub frames: Vec<Vec<Complex64>>,
    pub config: StftConfig,
    /// Original signal length, kept so synthesis can crop exactly.
    pub num_samples: usize,
}

/// T x B non-negative magnitudes.
#[derive(Debug, Clone)]
pub struct MagnitudeSpectrogram {
    pub frames: Vec<Vec<f64>>,
    pub config: StftConfig,
    pub num_samples: usize,
}

impl ComplexSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

impl MagnitudeSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

/// Forward STFT with center-aligned frames.
pub fn stft(signal: &Signal, config: &StftConfig) -> Result<ComplexSpectrogram> {
    config.validate()?;
    signal.expect_rate(config.sample_rate)?;
    let n = config.fft_size;
    let pad = n / 2;
    let len = signal.len();
    let t_frames = config.num_frames(len);
    let window = hann_periodic(n);
    let plan = Fft::new(n)?;
    let mut frames = Vec::with_capacity(t_frames);
    let mut buf = vec![0.0f64; n];
    for t in 0..t_frames {
        let start = t * config.hop; // in padded coordinates
        for (i, slot) in buf.iter_mut().enumerate() {
            let p = start + i;
            *slot = if p >= pad && p - pad < len {
                signal.samples[p - pad] * window[i]
            } else {
                0.0
            };
        }
        frames.push(real_forward(&plan, &buf));
    }
    Ok(ComplexSpectrogram { frames, config: *config, num_samples: len })
}

/// Inverse STFT: windowed overlap-add normalized by the accumulated
/// squared-window envelope, cropped back to the original length.
pub fn istft(spec: &ComplexSpectrogram) -> Result<Signal> {
    let config = &spec.config;
    config.validate()?;
    let n = config.fft_size;
    let bins = config.num_bins();
    for frame in &spec.frames {
        if frame.len() != bins {
            return Err(Error::Contract("spectrogram frame width does not match config"));
        }
    }
    let pad = n / 2;
    let t_frames = spec.frames.len();
    let total = if t_frames == 0 { 0 } else { (t_frames - 1) * config.hop + n };
    let window = hann_periodic(n);
    let plan = Fft::new(n)?;
    let mut acc = vec![0.0f64; total];
    let mut env = vec![0.0f64; total];
    for (t, frame) in spec.frames.iter().enumerate() {
        let time = real_inverse(&plan, frame);
        let start = t * config.hop;
        for i in 0..n {
            acc[start + i] += time[i] * window[i];
            env[start + i] += window[i] * window[i];
        }
    }
    let mut samples = vec![0.0f64; spec.num_samples];
    for (i, out) in samples.iter_mut().enumerate() {
        let p = i + pad;
        if p < total && env[p] > 1e-12 {
            *out = acc[p] / env[p];
        }
    }
    Signal::new(samples, config.sample_rate)
}

/// Entrywise complex modulus.
pub fn magnitude(spec: &ComplexSpectrogram) -> MagnitudeSpectrogram {
    MagnitudeSpectrogram {
        frames: spec
            .frames
            .iter()
            .map(|row| row.iter().map(|c| c.norm()).collect())
            .collect(),
        config: spec.config,
        num_samples: spec.num_samples,
    }
}
