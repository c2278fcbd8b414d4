//! Shared synthetic-corpus helpers for the integration and acceptance tests.
#![allow(dead_code)]

use std::path::Path;

use bwe::wav::{write_wav, WavEncoding};
use bwe_core::rng::Rng;
use bwe_core::Signal;

/// Harmonic signal with a tilted spectrum and a noise floor, so there is
/// genuine upper-band content to remove and restore.
pub fn speechlike(len: usize, seed: u64) -> Signal {
    let mut rng = Rng::from_seed(seed);
    let f0 = rng.uniform_in(100.0, 220.0);
    let fs = 48000.0;
    let mut samples = vec![0.0f64; len];
    let mut h = 1;
    while f0 * (h as f64) < 20000.0 {
        let amp = 1.0 / (1.0 + (f0 * h as f64 / 1200.0)).powi(2);
        let phase = rng.uniform_in(0.0, 2.0 * std::f64::consts::PI);
        for (n, s) in samples.iter_mut().enumerate() {
            *s += amp
                * (2.0 * std::f64::consts::PI * f0 * h as f64 * n as f64 / fs + phase).sin();
        }
        h += 1;
    }
    for s in samples.iter_mut() {
        *s = 0.2 * *s + 0.002 * rng.uniform_in(-1.0, 1.0);
    }
    Signal::new(samples, 48000).unwrap()
}

pub fn white_noise(len: usize, seed: u64, rate: u32) -> Signal {
    let mut rng = Rng::from_seed(seed);
    Signal::new((0..len).map(|_| rng.uniform_in(-0.5, 0.5)).collect(), rate).unwrap()
}

/// Writes `n` 48 kHz float32 utterances `utt-00.wav` .. into `dir`.
pub fn write_corpus(dir: &Path, n: usize, len: usize, seed: u64) -> Vec<String> {
    std::fs::create_dir_all(dir).unwrap();
    (0..n)
        .map(|i| {
            let id = format!("utt-{i:02}");
            let s = speechlike(len, seed + i as u64);
            write_wav(&s, &dir.join(format!("{id}.wav")), WavEncoding::Float32).unwrap();
            id
        })
        .collect()
}

/// All `*.wav` contents of a directory, sorted by file name.
pub fn wav_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("wav"))
        .map(|p| {
            (
                p.file_name().unwrap().to_str().unwrap().to_string(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}
