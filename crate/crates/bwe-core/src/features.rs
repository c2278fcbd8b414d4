//! Coarse K-band log-magnitude features and 80-band log-mel extraction.
//!
//! The coarse representation groups the 1025 STFT bins into K=64
//! non-overlapping brickwall bands via a 0/1 grouping matrix M, compresses
//! per frame as X = log10(M F + eps) and decompresses through the closed-form
//! pseudoinverse, which stays non-negative because the bands are disjoint.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::fnv1a;
use crate::stft::{MagnitudeSpectrogram, StftConfig};

/// Floor constant inside the log compression.
pub const EPSILON: f64 = 1e-5;
/// Number of coarse bands.
pub const NUM_BANDS: usize = 64;
/// Number of mel bands.
pub const NUM_MEL_BANDS: usize = 80;

/// Non-overlapping brickwall filterbank over the STFT bins, with its
/// closed-form pseudoinverse (transpose scaled by reciprocal row sums).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingMatrix {
    band_edges: Vec<usize>,
    num_bins: usize,
}

impl GroupingMatrix {
    pub fn band_count(&self) -> usize {
        self.band_edges.len() - 1
    }

    pub fn bin_count(&self) -> usize {
        self.num_bins
    }

    /// K+1 strictly increasing bin indices; band k spans [edges[k], edges[k+1]).
    pub fn band_edges(&self) -> &[usize] {
        &self.band_edges
    }

    pub fn band_width(&self, band: usize) -> usize {
        self.band_edges[band + 1] - self.band_edges[band]
    }

    pub fn band_of_bin(&self, bin: usize) -> usize {
        debug_assert!(bin < self.num_bins);
        match self.band_edges.binary_search(&bin) {
            Ok(k) => k.min(self.band_count() - 1),
            Err(k) => k - 1,
        }
    }

    /// Dense K x B matrix (entries 0 or 1).
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let k = self.band_count();
        let mut m = vec![vec![0.0; self.num_bins]; k];
        for band in 0..k {
            for bin in self.band_edges[band]..self.band_edges[band + 1] {
                m[band][bin] = 1.0;
            }
        }
        m
    }

    /// Dense B x K pseudoinverse; entrywise non-negative.
    pub fn pinv(&self) -> Vec<Vec<f64>> {
        let k = self.band_count();
        let mut p = vec![vec![0.0; k]; self.num_bins];
        for band in 0..k {
            let w = 1.0 / self.band_width(band) as f64;
            for bin in self.band_edges[band]..self.band_edges[band + 1] {
                p[bin][band] = w;
            }
        }
        p
    }
}

/// Coarse T x K log10-domain features.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseSpectrum {
    pub frames: Vec<Vec<f64>>,
    pub band_count: usize,
    pub config: StftConfig,
    pub num_samples: usize,
}

impl CoarseSpectrum {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

/// T x 80 log10-domain mel features.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub frames: Vec<Vec<f64>>,
}

impl MelSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

/// Uniform partition of `bins` into `bands`: floor(bins/bands) bins per band,
/// the last band absorbing the remainder.
pub fn build_grouping_matrix(bins: usize, bands: usize) -> Result<GroupingMatrix> {
    if bands == 0 || bands > bins {
        return Err(Error::Contract("band count must be in 1..=bin count"));
    }
    let width = bins / bands;
    let mut edges = Vec::with_capacity(bands + 1);
    for k in 0..bands {
        edges.push(k * width);
    }
    edges.push(bins);
    Ok(GroupingMatrix { band_edges: edges, num_bins: bins })
}

/// The canonical 64-band grouping over the 2048-point STFT (1025 bins).
pub fn default_grouping() -> GroupingMatrix {
    build_grouping_matrix(StftConfig::default_48k().num_bins(), NUM_BANDS).unwrap()
}

/// X = log10(M F + eps), per frame.
pub fn compress(mag: &MagnitudeSpectrogram, g: &GroupingMatrix) -> Result<CoarseSpectrum> {
    let bins = g.bin_count();
    let k = g.band_count();
    let mut frames = Vec::with_capacity(mag.frames.len());
    for row in &mag.frames {
        if row.len() != bins {
            return Err(Error::Contract("magnitude bin count does not match grouping"));
        }
        let mut coarse = Vec::with_capacity(k);
        for band in 0..k {
            let sum: f64 = row[g.band_edges[band]..g.band_edges[band + 1]].iter().sum();
            coarse.push(libm::log10(sum + EPSILON));
        }
        frames.push(coarse);
    }
    Ok(CoarseSpectrum { frames, band_count: k, config: mag.config, num_samples: mag.num_samples })
}

/// F = M-pinv (10^Y - eps): piecewise-constant non-negative fine magnitudes.
pub fn decompress(coarse: &CoarseSpectrum, g: &GroupingMatrix) -> Result<MagnitudeSpectrogram> {
    if coarse.band_count != g.band_count() {
        return Err(Error::Contract("coarse band count does not match grouping"));
    }
    let bins = g.bin_count();
    let mut frames = Vec::with_capacity(coarse.frames.len());
    for row in &coarse.frames {
        let mut fine = vec![0.0f64; bins];
        for band in 0..g.band_count() {
            let linear = (libm::pow(10.0, row[band]) - EPSILON).max(0.0);
            let per_bin = linear / g.band_width(band) as f64;
            for bin in g.band_edges[band]..g.band_edges[band + 1] {
                fine[bin] = per_bin;
            }
        }
        frames.push(fine);
    }
    Ok(MagnitudeSpectrogram { frames, config: coarse.config, num_samples: coarse.num_samples })
}

/// HTK mel scale.
fn hz_to_mel(f: f64) -> f64 {
    2595.0 * libm::log10(1.0 + f / 700.0)
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (libm::pow(10.0, m / 2595.0) - 1.0)
}

/// Triangular mel filterbank rows over the STFT bins, 0 Hz to Nyquist,
/// area-normalized per band.
pub fn mel_filterbank(config: &StftConfig, num_bands: usize) -> Vec<Vec<f64>> {
    let bins = config.num_bins();
    let nyquist = config.sample_rate as f64 / 2.0;
    let mel_max = hz_to_mel(nyquist);
    let points: Vec<f64> = (0..num_bands + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (num_bands + 1) as f64))
        .collect();
    let bin_hz = config.bin_hz();
    let mut bank = Vec::with_capacity(num_bands);
    for m in 0..num_bands {
        let (lo, center, hi) = (points[m], points[m + 1], points[m + 2]);
        let norm = 2.0 / (hi - lo);
        let mut row = vec![0.0f64; bins];
        for (bin, w) in row.iter_mut().enumerate() {
            let f = bin as f64 * bin_hz;
            if f > lo && f < hi {
                let tri = if f <= center { (f - lo) / (center - lo) } else { (hi - f) / (hi - center) };
                *w = tri * norm;
            }
        }
        bank.push(row);
    }
    bank
}

/// 80-band log10 mel features with the same eps floor as the coarse domain.
pub fn log_mel(mag: &MagnitudeSpectrogram) -> Result<MelSpectrogram> {
    let bank = mel_filterbank(&mag.config, NUM_MEL_BANDS);
    let bins = mag.config.num_bins();
    let mut frames = Vec::with_capacity(mag.frames.len());
    for row in &mag.frames {
        if row.len() != bins {
            return Err(Error::Contract("magnitude bin count does not match config"));
        }
        let mut mel = Vec::with_capacity(NUM_MEL_BANDS);
        for filt in &bank {
            let e: f64 = filt.iter().zip(row).map(|(w, v)| w * v).sum();
            mel.push(libm::log10(e + EPSILON));
        }
        frames.push(mel);
    }
    Ok(MelSpectrogram { frames })
}

/// Stable hash over everything a predictor model must agree on with the
/// feature extraction: STFT geometry, grouping layout, and cutoff band.
pub fn feature_config_hash(config: &StftConfig, g: &GroupingMatrix, cutoff_band: usize) -> u64 {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&(config.fft_size as u64).to_le_bytes());
    bytes.extend_from_slice(&(config.hop as u64).to_le_bytes());
    bytes.extend_from_slice(&(config.sample_rate as u64).to_le_bytes());
    bytes.extend_from_slice(&(cutoff_band as u64).to_le_bytes());
    for &e in g.band_edges() {
        bytes.extend_from_slice(&(e as u64).to_le_bytes());
    }
    fnv1a(&bytes)
}
