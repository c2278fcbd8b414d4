//! Exciters: broaden the bandlimited input so the band above the passband
//! carries energy, ideally spectrally flat, while the passband itself is
//! left untouched.
//!
//! All three variants run on the same 2048/512 STFT grid as the LTV stage.
//! Synthesis only writes bins a couple of bins above the passband edge, so
//! the passband bins survive one analysis/synthesis round bit-for-bit and
//! the residual connection stays exact.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::degrade::DegradationRecord;
use crate::error::{Error, Result};
use crate::features::{CoarseSpectrum, GroupingMatrix};
use crate::rng::Rng;
use crate::signal::Signal;
use crate::stft::{istft, stft, StftConfig};

/// Guard bins between the passband edge and synthesized content, keeping
/// window-spread cross-talk out of the passband.
const GUARD_BINS: usize = 3;

/// Level of the flat upper-band excitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlatLevel {
    /// Per frame: mean bin magnitude of the top two passband coarse bands.
    PassbandMean,
    /// Fixed linear magnitude.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExciterKind {
    /// Random-phase, flat-magnitude synthesis above the passband.
    Noise { seed: u64, flat_level: FlatLevel },
    /// Spectral mirroring of the passband up to Nyquist.
    Fold,
    /// Full-wave rectification, highpassed above the passband.
    Rect,
}

impl ExciterKind {
    pub fn noise(seed: u64) -> Self {
        ExciterKind::Noise { seed, flat_level: FlatLevel::PassbandMean }
    }
}

/// Produces the wideband excitation of the bandlimited 48 kHz input.
/// The passband (bins at or below f_hi plus the guard) is copied through
/// unchanged; only bins above it are synthesized.
pub fn excite(
    input: &Signal,
    kind: &ExciterKind,
    record: &DegradationRecord,
    grouping: &GroupingMatrix,
) -> Result<Signal> {
    record.validate()?;
    input.expect_rate(48000)?;
    if let ExciterKind::Noise { flat_level: FlatLevel::Fixed(level), .. } = kind {
        if *level <= 0.0 {
            return Err(Error::Contract("fixed flat level must be positive"));
        }
    }
    let config = StftConfig::default_48k();
    let mut spec = stft(input, &config)?;
    let bins = config.num_bins();
    let bin_hz = config.bin_hz();
    let edge_bin = (record.f_hi / bin_hz) as usize; // highest bin inside the passband
    let start = edge_bin + GUARD_BINS;
    if start >= bins {
        return Err(Error::Contract("passband edge leaves no upper band"));
    }
    match kind {
        ExciterKind::Noise { seed, flat_level } => {
            let mut rng = Rng::from_seed(*seed);
            let k = record.cutoff_band_k;
            for frame in &mut spec.frames {
                let level = match flat_level {
                    FlatLevel::Fixed(v) => *v,
                    FlatLevel::PassbandMean => {
                        // mean bin magnitude over the top two passband bands
                        let lo = grouping.band_edges()[k.saturating_sub(2)];
                        let hi = grouping.band_edges()[k];
                        let sum: f64 = frame[lo..hi].iter().map(|c| c.norm()).sum();
                        sum / (hi - lo) as f64
                    }
                };
                for (bin, v) in frame.iter_mut().enumerate().skip(start) {
                    if bin == bins - 1 {
                        // Nyquist bin of a real signal must stay real
                        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
                        *v = Complex64::new(sign * level, 0.0);
                    } else {
                        let phase = rng.uniform_in(0.0, 2.0 * core::f64::consts::PI);
                        *v = Complex64::new(level * libm::cos(phase), level * libm::sin(phase));
                    }
                }
            }
        }
        ExciterKind::Fold => {
            let lo_bin = libm::ceil(record.f_lo / bin_hz) as usize;
            if edge_bin <= lo_bin + 1 {
                return Err(Error::Contract("passband too narrow to fold"));
            }
            let period = 2 * (edge_bin - lo_bin);
            for frame in &mut spec.frames {
                for bin in start..bins {
                    // reflect the bin index back into [lo_bin, edge_bin]
                    let mut r = (bin - lo_bin) % period;
                    let mut odd = false;
                    if r > edge_bin - lo_bin {
                        r = period - r;
                        odd = true;
                    }
                    let src = lo_bin + r;
                    frame[bin] = if odd { frame[src].conj() } else { frame[src] };
                }
                let nyq = bins - 1;
                frame[nyq] = Complex64::new(frame[nyq].re, 0.0);
            }
        }
        ExciterKind::Rect => {
            let rect = Signal::new(
                input.samples.iter().map(|v| libm::fabs(*v)).collect(),
                48000,
            )?;
            let rect_spec = stft(&rect, &config)?;
            for (frame, rframe) in spec.frames.iter_mut().zip(&rect_spec.frames) {
                for bin in start..bins {
                    frame[bin] = rframe[bin];
                }
                let nyq = bins - 1;
                frame[nyq] = Complex64::new(frame[nyq].re, 0.0);
            }
        }
    }
    istft(&spec)
}

/// Per-frame (max - min) over coarse bands at or above k, in log10 units.
/// Zero means exactly flat.
pub fn flatness(coarse: &CoarseSpectrum, k: usize) -> Result<Vec<f64>> {
    if k >= coarse.band_count {
        return Err(Error::Contract("cutoff band out of range"));
    }
    Ok(coarse
        .frames
        .iter()
        .map(|row| {
            let hi = &row[k..];
            let max = hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = hi.iter().copied().fold(f64::INFINITY, f64::min);
            max - min
        })
        .collect())
}
