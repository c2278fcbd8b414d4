//! Signal-processing core for dual-stage speech bandwidth extension.
//!
//! The pipeline takes bandlimited 8 kHz speech to 48 kHz in two stages:
//! an exciter broadens the spectrum above the input passband, then a
//! zero-phase linear time-varying filter shapes the excitation to a
//! predicted coarse spectral envelope. A residual connection keeps the
//! input passband untouched.
//!
//! This crate is `no_std` (with `alloc`) and holds only the numerics:
//! STFT analysis/synthesis, coarse-band features, the degradation
//! protocol, exciters, the LTV filter, envelope predictors, and the
//! objective metrics. File IO, WAV handling, and the CLI live in the
//! companion `bwe` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod degrade;
pub mod error;
pub mod excite;
pub mod fft;
pub mod features;
pub mod ltv;
pub mod metrics;
pub mod pipeline;
pub mod predict;
pub mod resample;
pub mod rng;
pub mod signal;
pub mod stft;
pub mod window;

pub use error::{Error, Result};
pub use signal::Signal;
