//! WAV reading and writing. PCM16 and float32 are accepted on read;
//! writes default to float32 so metric computations stay free of
//! quantization noise, with PCM16 available via flag.

use std::path::Path;

use anyhow::{bail, Context, Result};
use bwe_core::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavEncoding {
    #[default]
    Float32,
    Pcm16,
}

/// Reads a WAV file. Multi-channel files contribute channel 0 only, with a
/// warning on stderr.
pub fn read_wav(path: &Path) -> Result<Signal> {
    let reader =
        hound::WavReader::open(path).with_context(|| format!("opening {}", path.display()))?;
    let spec = reader.spec();
    if spec.channels == 0 {
        bail!("{}: zero channels", path.display());
    }
    if spec.channels > 1 {
        eprintln!(
            "warning: {}: {} channels, using channel 0 only",
            path.display(),
            spec.channels
        );
    }
    let step = spec.channels as usize;
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .step_by(step)
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("decoding {}", path.display()))?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .step_by(step)
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("decoding {}", path.display()))?,
        (fmt, bits) => bail!("{}: unsupported encoding {fmt:?}/{bits}-bit", path.display()),
    };
    Signal::new(samples, spec.sample_rate)
        .with_context(|| format!("validating {}", path.display()))
}

pub fn write_wav(signal: &Signal, path: &Path, encoding: WavEncoding) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate,
        bits_per_sample: match encoding {
            WavEncoding::Float32 => 32,
            WavEncoding::Pcm16 => 16,
        },
        sample_format: match encoding {
            WavEncoding::Float32 => hound::SampleFormat::Float,
            WavEncoding::Pcm16 => hound::SampleFormat::Int,
        },
    };
    let mut writer = hound::WavWriter::create(path, spec)
        .with_context(|| format!("creating {}", path.display()))?;
    match encoding {
        WavEncoding::Float32 => {
            for &v in &signal.samples {
                writer.write_sample(v as f32)?;
            }
        }
        WavEncoding::Pcm16 => {
            for &v in &signal.samples {
                let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(q)?;
            }
        }
    }
    writer.finalize().with_context(|| format!("finalizing {}", path.display()))
}
