//! Degradation protocol: brickwall bandlimiting with randomized cutoffs
//! and decimation to the 8 kHz input rate.

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Dft;
use crate::rng::{utterance_seed, Rng};
use crate::signal::Signal;

/// First coarse band treated as missing for K=64 bands (375 Hz each):
/// band 11 covers 4125-4500 Hz, the first band fully above 4 kHz.
pub const CUTOFF_BAND_K: usize = 11;

/// Per-utterance passband and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationRecord {
    pub utterance_id: String,
    pub f_lo: f64,
    pub f_hi: f64,
    pub seed: u64,
    pub cutoff_band_k: usize,
}

impl DegradationRecord {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=500.0).contains(&self.f_lo) {
            return Err(Error::Contract("f_lo must be in [0, 500] Hz"));
        }
        if !(3500.0..=4000.0).contains(&self.f_hi) {
            return Err(Error::Contract("f_hi must be in [3500, 4000] Hz"));
        }
        Ok(())
    }
}

/// Frequency-domain brickwall: zero every bin strictly below f_lo or
/// strictly above f_hi on the exact-length DFT grid, then resynthesize.
///
/// A single full-length frame (rather than short overlapped ones) is what
/// makes the operator exactly linear and idempotent and keeps stopband
/// energy at the rounding floor; windowed overlap-add realizations leak
/// around -40 dB at the cutoff and drift a few percent when re-applied.
pub fn bandlimit(signal: &Signal, f_lo: f64, f_hi: f64) -> Result<Signal> {
    if f_lo >= f_hi {
        return Err(Error::Contract("f_lo must be below f_hi"));
    }
    let n = signal.len();
    if n == 0 {
        return Signal::new(Vec::new(), signal.sample_rate);
    }
    let plan = Dft::new(n)?;
    let mut buf: Vec<Complex64> =
        signal.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut buf);
    let fs = signal.sample_rate as f64;
    for (bin, v) in buf.iter_mut().enumerate() {
        // bins above n/2 are the negative frequencies; the mask is symmetric
        let idx = bin.min(n - bin);
        let f = idx as f64 * fs / n as f64;
        if f < f_lo || f > f_hi {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    plan.inverse(&mut buf);
    Signal::new(buf.into_iter().map(|c| c.re).collect(), signal.sample_rate)
}

/// Bandlimit per the record, then decimate by sample picking. The brickwall
/// at f_hi <= 4 kHz already provides the anti-aliasing.
pub fn degrade_to_8k(signal: &Signal, record: &DegradationRecord) -> Result<Signal> {
    record.validate()?;
    signal.expect_rate(48000)?;
    let limited = bandlimit(signal, record.f_lo, record.f_hi)?;
    let samples: Vec<f64> = limited.samples.iter().step_by(6).copied().collect();
    debug_assert_eq!(samples.len(), signal.len().div_ceil(6));
    Signal::new(samples, 8000)
}

/// Draws a record with f_lo ~ U[0, 500] and f_hi ~ U[3500, 4000], seeded
/// per utterance so batch order and parallelism never change outputs.
pub fn sample_record(rng_seed: u64, utterance_id: &str) -> DegradationRecord {
    let seed = utterance_seed(rng_seed, utterance_id);
    let mut rng = Rng::from_seed(seed);
    let f_lo = rng.uniform_in(0.0, 500.0);
    let f_hi = rng.uniform_in(3500.0, 4000.0);
    DegradationRecord {
        utterance_id: utterance_id.to_string(),
        f_lo,
        f_hi,
        seed,
        cutoff_band_k: CUTOFF_BAND_K,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::band_energy_db;

    fn sine(freq: f64, len: usize) -> Signal {
        Signal::new(
            (0..len)
                .map(|n| (2.0 * std::f64::consts::PI * freq * n as f64 / 48000.0).sin())
                .collect(),
            48000,
        )
        .unwrap()
    }

    fn noise(len: usize, seed: u64) -> Signal {
        let mut rng = Rng::from_seed(seed);
        Signal::new((0..len).map(|_| rng.uniform_in(-1.0, 1.0)).collect(), 48000).unwrap()
    }

    #[test]
    fn rejects_inverted_cutoffs() {
        let s = noise(8192, 1);
        assert!(bandlimit(&s, 4000.0, 400.0).is_err());
    }

    #[test]
    fn stopband_tone_removed() {
        let s = sine(6000.0, 48000);
        let out = bandlimit(&s, 0.0, 4000.0).unwrap();
        assert!(out.rms() <= 1e-4 * s.rms());
    }

    #[test]
    fn passband_tone_preserved() {
        let s = sine(1000.0, 48000);
        let out = bandlimit(&s, 0.0, 4000.0).unwrap();
        // compare RMS over the interior, away from STFT boundary taper
        let margin = 4096;
        let rms = |x: &[f64]| {
            let e: f64 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
            e.sqrt()
        };
        let a = rms(&s.samples[margin..s.len() - margin]);
        let b = rms(&out.samples[margin..out.len() - margin]);
        let db = 20.0 * (b / a).log10();
        assert!(db.abs() < 0.1, "ripple {db} dB");
    }

    #[test]
    fn zero_in_zero_out() {
        let out = bandlimit(&Signal::zeros(8192, 48000), 100.0, 4000.0).unwrap();
        assert!(out.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn leakage_below_minus_80_db() {
        let s = noise(48000, 2);
        let out = bandlimit(&s, 300.0, 3700.0).unwrap();
        assert!(band_energy_db(&out, 0.0, 250.0).unwrap() <= -80.0);
        assert!(band_energy_db(&out, 3750.0, 24000.0).unwrap() <= -80.0);
    }

    #[test]
    fn idempotent() {
        let s = noise(16384, 3);
        let once = bandlimit(&s, 200.0, 3800.0).unwrap();
        let twice = bandlimit(&once, 200.0, 3800.0).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in once.samples.iter().zip(&twice.samples) {
            num += (a - b).powi(2);
            den += a.powi(2);
        }
        assert!((num / den).sqrt() < 1e-9);
    }

    #[test]
    fn linear_operator() {
        let a = noise(8192, 4);
        let b = noise(8192, 5);
        let mix = Signal::new(
            a.samples.iter().zip(&b.samples).map(|(x, y)| 0.3 * x + 0.6 * y).collect(),
            48000,
        )
        .unwrap();
        let la = bandlimit(&a, 100.0, 3900.0).unwrap();
        let lb = bandlimit(&b, 100.0, 3900.0).unwrap();
        let lm = bandlimit(&mix, 100.0, 3900.0).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..lm.len() {
            let want = 0.3 * la.samples[i] + 0.6 * lb.samples[i];
            num += (lm.samples[i] - want).powi(2);
            den += want.powi(2) + 1e-30;
        }
        assert!((num / den).sqrt() < 1e-9);
    }

    #[test]
    fn degrade_output_length_and_determinism() {
        let s = noise(48001, 6);
        let rec = sample_record(42, "utt-a");
        let a = degrade_to_8k(&s, &rec).unwrap();
        let b = degrade_to_8k(&s, &rec).unwrap();
        assert_eq!(a.len(), 48001usize.div_ceil(6));
        assert_eq!(a.sample_rate, 8000);
        assert_eq!(a.samples, b.samples); // bit-identical
    }

    #[test]
    fn degrade_white_noise_flat_to_3900() {
        // Welch-style average over coarse sub-bands of the 8 kHz output
        let s = noise(96000, 7);
        let rec = DegradationRecord {
            utterance_id: "w".into(),
            f_lo: 0.0,
            f_hi: 4000.0,
            seed: 0,
            cutoff_band_k: CUTOFF_BAND_K,
        };
        let out = degrade_to_8k(&s, &rec).unwrap();
        // average band power in 500 Hz slices up to 3.9 kHz
        let mut dbs = Vec::new();
        for i in 0..7 {
            let lo = 200.0 + 500.0 * i as f64;
            let hi = (lo + 500.0).min(3900.0);
            dbs.push(band_energy_db(&out, lo, hi).unwrap() - 10.0 * ((hi - lo) / 4000.0).log10());
        }
        let mean = dbs.iter().sum::<f64>() / dbs.len() as f64;
        for d in &dbs {
            assert!((d - mean).abs() < 1.0, "slice deviates {} dB", d - mean);
        }
    }

    #[test]
    fn high_f_lo_removes_low_band() {
        let s = noise(48000, 8);
        let rec = DegradationRecord {
            utterance_id: "l".into(),
            f_lo: 500.0,
            f_hi: 4000.0,
            seed: 0,
            cutoff_band_k: CUTOFF_BAND_K,
        };
        let limited = bandlimit(&s, rec.f_lo, rec.f_hi).unwrap();
        assert!(band_energy_db(&limited, 0.0, 450.0).unwrap() <= -80.0);
    }

    #[test]
    fn sample_record_reproducible_and_in_range() {
        let a = sample_record(42, "utt-1");
        let b = sample_record(42, "utt-1");
        assert_eq!(a, b);
        a.validate().unwrap();
        assert_eq!(a.cutoff_band_k, 11);
    }

    #[test]
    fn sample_record_means() {
        let mut lo_sum = 0.0;
        let mut hi_sum = 0.0;
        let n = 10000;
        for i in 0..n {
            let r = sample_record(7, &format!("utt-{i}"));
            r.validate().unwrap();
            lo_sum += r.f_lo;
            hi_sum += r.f_hi;
        }
        let lo_mean = lo_sum / n as f64;
        let hi_mean = hi_sum / n as f64;
        assert!((lo_mean - 250.0).abs() < 0.02 * 250.0, "lo mean {lo_mean}");
        assert!((hi_mean - 3750.0).abs() < 0.02 * 3750.0, "hi mean {hi_mean}");
    }
}
