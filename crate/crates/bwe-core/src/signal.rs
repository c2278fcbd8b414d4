use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Mono PCM audio with sample-rate metadata. Amplitudes nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Signal {
    /// Builds a signal, rejecting non-finite samples and a zero rate.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Contract("sample rate must be positive"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Contract("samples must be finite"));
        }
        Ok(Signal { samples, sample_rate })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Self {
        Signal { samples: vec![0.0; len], sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Fails unless the signal is at the expected rate.
    pub fn expect_rate(&self, rate: u32) -> Result<()> {
        if self.sample_rate != rate {
            return Err(Error::Contract("signal is not at the expected sample rate"));
        }
        Ok(())
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let e: f64 = self.samples.iter().map(|s| s * s).sum();
        libm::sqrt(e / self.samples.len() as f64)
    }
}
