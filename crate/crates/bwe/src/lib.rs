//! File formats, corpus orchestration, and WAV IO around `bwe-core`.
//!
//! The DSP lives in `bwe-core`; this crate owns everything that touches the
//! filesystem: WAV reading/writing, the degradation manifest, binary
//! feature/model dumps, run configuration, and the batch subcommands the
//! `bwe` binary exposes.

pub mod config;
pub mod corpus;
pub mod formats;
pub mod manifest;
pub mod report;
pub mod wav;
