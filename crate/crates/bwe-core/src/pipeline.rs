//! End-to-end assembly of the extension pipeline:
//! upsample -> excite -> predict -> build response -> LTV filter -> residual mix.

use alloc::string::String;
use alloc::vec::Vec;

use crate::degrade::DegradationRecord;
use crate::error::{Error, Result};
use crate::excite::{excite, ExciterKind};
use crate::features::{
    compress, default_grouping, feature_config_hash, CoarseSpectrum, GroupingMatrix,
};
use crate::ltv::{apply_ltv, build_response, residual_mix, LtvMode, DEFAULT_GAIN_CEILING_DB};
use crate::predict::{oracle_predict, predict, FeaturePair, PredictorModel};
use crate::resample::upsample_6x;
use crate::rng::fnv1a;
use crate::signal::Signal;
use crate::stft::{magnitude, stft, StftConfig};

/// How the target envelope is obtained.
pub enum Predictor<'a> {
    /// Ground-truth 48 kHz reference; upper performance bound.
    Oracle(&'a Signal),
    /// Trained ridge model.
    Model(&'a PredictorModel),
}

#[derive(Debug, Clone)]
pub struct ExtendOptions {
    pub exciter: ExciterKind,
    pub ltv_mode: LtvMode,
    pub gain_ceiling_db: f64,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            exciter: ExciterKind::noise(0),
            ltv_mode: LtvMode::Match,
            gain_ceiling_db: DEFAULT_GAIN_CEILING_DB,
        }
    }
}

/// Coarse features of a 48 kHz signal on the canonical grid.
pub fn coarse_features(signal: &Signal, g: &GroupingMatrix) -> Result<CoarseSpectrum> {
    let config = StftConfig::default_48k();
    compress(&magnitude(&stft(signal, &config)?), g)
}

/// The upsample-only baseline: what the pipeline would output with the
/// excitation and filter stages disabled.
pub fn baseline(input_8k: &Signal) -> Result<Signal> {
    upsample_6x(input_8k)
}

/// Extends one utterance from 8 kHz to 48 kHz.
pub fn extend(
    input_8k: &Signal,
    predictor: Predictor<'_>,
    record: &DegradationRecord,
    options: &ExtendOptions,
) -> Result<Signal> {
    record.validate()?;
    let g = default_grouping();
    let config = StftConfig::default_48k();
    let upsampled = upsample_6x(input_8k)?;
    let excited = excite(&upsampled, &options.exciter, record, &g)?;
    let input_features = coarse_features(&upsampled, &g)?;
    let target = match predictor {
        Predictor::Oracle(reference) => {
            if reference.len() != upsampled.len() {
                return Err(Error::Contract("oracle reference length does not match input"));
            }
            let pair = FeaturePair {
                x_features: input_features,
                y_features: coarse_features(reference, &g)?,
                record: record.clone(),
            };
            oracle_predict(&pair)?
        }
        Predictor::Model(model) => {
            let hash = feature_config_hash(&config, &g, record.cutoff_band_k);
            predict(model, &input_features, hash)?
        }
    };
    let response = build_response(&target, &g, options.ltv_mode)?;
    let filtered = apply_ltv(
        &excited,
        &response,
        Some(record.cutoff_band_k),
        &g,
        options.gain_ceiling_db,
    )?;
    residual_mix(&upsampled, &filtered)
}

/// Deterministic 90/10 train/validation split by sorted-id hash.
/// Returns (train_ids, validation_ids).
pub fn split_train_validation(ids: &[String]) -> (Vec<String>, Vec<String>) {
    let mut ordered: Vec<&String> = ids.iter().collect();
    ordered.sort_by_key(|id| (fnv1a(id.as_bytes()), (*id).clone()));
    let n = ordered.len();
    let train_n = if n <= 1 { n } else { ((n * 9) / 10).max(1).min(n - 1) };
    let train = ordered[..train_n].iter().map(|s| (*s).clone()).collect();
    let validation = ordered[train_n..].iter().map(|s| (*s).clone()).collect();
    (train, validation)
}

/// Default ridge sweep grid.
pub fn ridge_sweep_grid() -> [f64; 6] {
    [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0]
}
