//! Short-Time Objective Intelligibility (STOI).
//!
//! The canonical procedure: resample to 10 kHz, drop frames more than 40 dB
//! below the reference's loudest frame, decompose into 15 one-third-octave
//! bands starting at 150 Hz (256-sample frames, 512-point FFT, 50% overlap),
//! then average clipped short-time correlations over 384 ms (30-frame)
//! segments.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fft::{real_forward, Fft};
use crate::resample::resample;
use crate::signal::Signal;
use crate::window::hann_symmetric;

const FS: u32 = 10000;
const FRAME_LEN: usize = 256;
const HOP: usize = 128;
const NFFT: usize = 512;
const NUM_BANDS: usize = 15;
const MIN_FREQ: f64 = 150.0;
const SEG_FRAMES: usize = 30;
const BETA_DB: f64 = -15.0;
const DYN_RANGE_DB: f64 = 40.0;
const EPS: f64 = 1e-15;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn to_10k(signal: &Signal) -> Vec<f64> {
    if signal.sample_rate == FS {
        return signal.samples.clone();
    }
    let g = gcd(FS as usize, signal.sample_rate as usize);
    let up = FS as usize / g;
    let down = signal.sample_rate as usize / g;
    resample(&signal.samples, up, down, signal.sample_rate as f64, 4500.0, 500.0, 80.0)
}

/// Analysis window: Hann without the zero endpoints, as in the reference
/// implementation.
fn analysis_window() -> Vec<f64> {
    let full = hann_symmetric(FRAME_LEN + 2);
    full[1..=FRAME_LEN].to_vec()
}

/// Drops frames whose reference energy is more than 40 dB below the peak
/// frame, overlap-adding the surviving windowed frames back to signals.
fn remove_silent_frames(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let w = analysis_window();
    let mut starts = Vec::new();
    let mut s = 0usize;
    while s + FRAME_LEN <= x.len() {
        starts.push(s);
        s += HOP;
    }
    let energies: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let e: f64 = (0..FRAME_LEN).map(|i| (x[s + i] * w[i]) * (x[s + i] * w[i])).sum();
            20.0 * libm::log10(libm::sqrt(e) + EPS)
        })
        .collect();
    let peak = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = starts
        .iter()
        .zip(&energies)
        .filter(|(_, &e)| peak - DYN_RANGE_DB - e < 0.0)
        .map(|(&s, _)| s)
        .collect();
    let out_len = if kept.is_empty() { 0 } else { (kept.len() - 1) * HOP + FRAME_LEN };
    let mut xs = vec![0.0; out_len];
    let mut ys = vec![0.0; out_len];
    for (j, &s) in kept.iter().enumerate() {
        let o = j * HOP;
        for i in 0..FRAME_LEN {
            xs[o + i] += x[s + i] * w[i];
            ys[o + i] += y[s + i] * w[i];
        }
    }
    (xs, ys)
}

/// One-third-octave band magnitudes: rows are frames, columns the 15 bands.
fn third_octave_bands(x: &[f64]) -> Vec<[f64; NUM_BANDS]> {
    let w = analysis_window();
    let plan = Fft::new(NFFT).unwrap();
    let bin_hz = FS as f64 / NFFT as f64;
    // band edge bins chosen as nearest bin to each edge frequency
    let mut edges = [(0usize, 0usize); NUM_BANDS];
    for (band, e) in edges.iter_mut().enumerate() {
        let f_low = MIN_FREQ * libm::pow(2.0, (2.0 * band as f64 - 1.0) / 6.0);
        let f_high = MIN_FREQ * libm::pow(2.0, (2.0 * band as f64 + 1.0) / 6.0);
        let nearest = |f: f64| -> usize {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for bin in 0..NFFT / 2 + 1 {
                let d = (bin as f64 * bin_hz - f).abs();
                if d < best_d {
                    best_d = d;
                    best = bin;
                }
            }
            best
        };
        *e = (nearest(f_low), nearest(f_high));
    }
    let mut out = Vec::new();
    let mut s = 0usize;
    let mut buf = vec![0.0; NFFT];
    while s + FRAME_LEN <= x.len() {
        for i in 0..FRAME_LEN {
            buf[i] = x[s + i] * w[i];
        }
        for v in buf.iter_mut().skip(FRAME_LEN) {
            *v = 0.0;
        }
        let spec = real_forward(&plan, &buf);
        let mut row = [0.0; NUM_BANDS];
        for (band, &(lo, hi)) in edges.iter().enumerate() {
            let e: f64 = spec[lo..hi].iter().map(|c| c.norm_sqr()).sum();
            row[band] = libm::sqrt(e);
        }
        out.push(row);
        s += HOP;
    }
    out
}

/// STOI between a clean reference and a processed estimate.
///
/// Both signals must share a sample rate and carry at least 384 ms of
/// above-threshold content.
pub fn stoi(reference: &Signal, estimate: &Signal) -> Result<f64> {
    if reference.sample_rate != estimate.sample_rate {
        return Err(Error::Contract("stoi requires matching sample rates"));
    }
    if reference.len() != estimate.len() {
        return Err(Error::Contract("stoi requires equal-length signals"));
    }
    let x = to_10k(reference);
    let y = to_10k(estimate);
    let (xs, ys) = remove_silent_frames(&x, &y);
    let xb = third_octave_bands(&xs);
    let yb = third_octave_bands(&ys);
    let frames = xb.len();
    if frames < SEG_FRAMES {
        return Err(Error::Contract("stoi requires at least 384 ms of voiced content"));
    }
    let clip = libm::pow(10.0, -BETA_DB / 20.0);
    let n_segments = frames - SEG_FRAMES + 1;
    let mut total = 0.0;
    for m in 0..n_segments {
        for band in 0..NUM_BANDS {
            let xseg: Vec<f64> = (0..SEG_FRAMES).map(|t| xb[m + t][band]).collect();
            let yseg: Vec<f64> = (0..SEG_FRAMES).map(|t| yb[m + t][band]).collect();
            let xn = libm::sqrt(xseg.iter().map(|v| v * v).sum::<f64>());
            let yn = libm::sqrt(yseg.iter().map(|v| v * v).sum::<f64>());
            let alpha = xn / (yn + EPS);
            let yprime: Vec<f64> = xseg
                .iter()
                .zip(&yseg)
                .map(|(&xv, &yv)| (yv * alpha).min(xv * (1.0 + clip)))
                .collect();
            let xm = xseg.iter().sum::<f64>() / SEG_FRAMES as f64;
            let ym = yprime.iter().sum::<f64>() / SEG_FRAMES as f64;
            let mut dot = 0.0;
            let mut nx = 0.0;
            let mut ny = 0.0;
            for t in 0..SEG_FRAMES {
                let a = xseg[t] - xm;
                let b = yprime[t] - ym;
                dot += a * b;
                nx += a * a;
                ny += b * b;
            }
            total += dot / (libm::sqrt(nx) * libm::sqrt(ny) + EPS);
        }
    }
    Ok(total / (n_segments * NUM_BANDS) as f64)
}
