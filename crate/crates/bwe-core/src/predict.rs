//! Envelope predictors: the oracle (reads ground-truth features) and a
//! closed-form ridge regression on context-windowed coarse features.
//!
//! Both follow the residual convention: bands below the cutoff band are
//! copied from the input features untouched; only the high bands are
//! predicted. Ridge training solves the normal equations directly, with
//! the bias column left unregularized.

use alloc::vec;
use alloc::vec::Vec;

use crate::degrade::DegradationRecord;
use crate::error::{Error, Result};
use crate::features::CoarseSpectrum;

/// Linear model from context-windowed input features to the high bands.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    pub band_count: usize,
    pub cutoff_band: usize,
    pub context_radius: usize,
    pub ridge: f64,
    pub config_hash: u64,
    /// One row per high band; each row has band_count*(2c+1)+1 weights,
    /// bias last.
    pub weights: Vec<Vec<f64>>,
}

impl PredictorModel {
    pub fn high_band_count(&self) -> usize {
        self.band_count - self.cutoff_band
    }

    pub fn feature_dim(&self) -> usize {
        self.band_count * (2 * self.context_radius + 1) + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff_band >= self.band_count {
            return Err(Error::Contract("cutoff band out of range"));
        }
        if self.weights.len() != self.high_band_count()
            || self.weights.iter().any(|w| w.len() != self.feature_dim())
        {
            return Err(Error::Contract("weight matrix shape mismatch"));
        }
        if self.weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::Contract("weights must be finite"));
        }
        Ok(())
    }
}

/// Input/target feature pair for one utterance.
#[derive(Debug, Clone)]
pub struct FeaturePair {
    pub x_features: CoarseSpectrum,
    pub y_features: CoarseSpectrum,
    pub record: DegradationRecord,
}

impl FeaturePair {
    pub fn validate(&self) -> Result<()> {
        if self.x_features.num_frames() != self.y_features.num_frames() {
            return Err(Error::Contract("feature pair frame counts differ"));
        }
        if self.x_features.band_count != self.y_features.band_count {
            return Err(Error::Contract("feature pair band counts differ"));
        }
        Ok(())
    }
}

/// Upper-bound predictor: ground-truth features for the high bands, input
/// features below the cutoff.
pub fn oracle_predict(pair: &FeaturePair) -> Result<CoarseSpectrum> {
    pair.validate()?;
    let k = pair.record.cutoff_band_k;
    let mut frames = Vec::with_capacity(pair.x_features.num_frames());
    for (x, y) in pair.x_features.frames.iter().zip(&pair.y_features.frames) {
        let mut row = x.clone();
        row[k..].copy_from_slice(&y[k..]);
        frames.push(row);
    }
    Ok(CoarseSpectrum {
        frames,
        band_count: pair.x_features.band_count,
        config: pair.x_features.config,
        num_samples: pair.x_features.num_samples,
    })
}

/// Mean absolute difference over frames and bands at or above k.
pub fn feature_loss(y: &CoarseSpectrum, y_hat: &CoarseSpectrum, k: usize) -> Result<f64> {
    if y.num_frames() != y_hat.num_frames() || y.band_count != y_hat.band_count {
        return Err(Error::Contract("feature loss requires matching shapes"));
    }
    if k >= y.band_count {
        return Err(Error::Contract("cutoff band out of range"));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (a, b) in y.frames.iter().zip(&y_hat.frames) {
        for (x, z) in a[k..].iter().zip(&b[k..]) {
            sum += libm::fabs(x - z);
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Context-windowed feature row for frame t: concatenated coarse frames
/// t-c..=t+c with edge replication, bias appended.
fn context_row(x: &CoarseSpectrum, t: usize, c: usize) -> Vec<f64> {
    let t_max = x.num_frames() - 1;
    let mut row = Vec::with_capacity(x.band_count * (2 * c + 1) + 1);
    for offset in -(c as isize)..=(c as isize) {
        let idx = (t as isize + offset).clamp(0, t_max as isize) as usize;
        row.extend_from_slice(&x.frames[idx]);
    }
    row.push(1.0);
    row
}

/// Cholesky factorization of a symmetric positive-definite matrix (in place,
/// lower triangle), then a solve per right-hand side.
fn cholesky_solve(mut a: Vec<Vec<f64>>, b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= a[i][k] * a[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::Numerical("normal equations not positive definite"));
                }
                a[i][i] = libm::sqrt(sum);
            } else {
                a[i][j] = sum / a[j][j];
            }
        }
    }
    let mut out = Vec::with_capacity(b.len());
    for rhs in b {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = rhs[i];
            for k in 0..i {
                sum -= a[i][k] * y[k];
            }
            y[i] = sum / a[i][i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= a[k][i] * x[k];
            }
            x[i] = sum / a[i][i];
        }
        out.push(x);
    }
    Ok(out)
}

/// Accumulated normal-equation terms, exposed so a sweep can refactor with
/// different ridge values without re-reading the corpus.
pub struct NormalEquations {
    pub ata: Vec<Vec<f64>>,
    pub atb: Vec<Vec<f64>>,
    pub num_rows: usize,
    pub band_count: usize,
    pub cutoff_band: usize,
    pub context_radius: usize,
    pub config_hash: u64,
}

/// Accumulates A^T A and A^T B over all frames of the given pairs, in
/// sorted-utterance-id order so the summation order is canonical.
pub fn accumulate_normal_equations(
    pairs: &[FeaturePair],
    context_radius: usize,
    config_hash: u64,
) -> Result<NormalEquations> {
    if pairs.is_empty() {
        return Err(Error::Contract("training requires at least one pair"));
    }
    for p in pairs {
        p.validate()?;
    }
    let band_count = pairs[0].x_features.band_count;
    let cutoff_band = pairs[0].record.cutoff_band_k;
    if pairs
        .iter()
        .any(|p| p.x_features.band_count != band_count || p.record.cutoff_band_k != cutoff_band)
    {
        return Err(Error::Contract("pairs disagree on band count or cutoff band"));
    }
    let dim = band_count * (2 * context_radius + 1) + 1;
    let high = band_count - cutoff_band;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].record.utterance_id.cmp(&pairs[b].record.utterance_id));
    let mut ata = vec![vec![0.0f64; dim]; dim];
    let mut atb = vec![vec![0.0f64; high]; dim];
    let mut num_rows = 0usize;
    for &pi in &order {
        let pair = &pairs[pi];
        for t in 0..pair.x_features.num_frames() {
            let row = context_row(&pair.x_features, t, context_radius);
            let target = &pair.y_features.frames[t][cutoff_band..];
            for i in 0..dim {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    ata[i][j] += ri * row[j];
                }
                for (h, &y) in target.iter().enumerate() {
                    atb[i][h] += ri * y;
                }
            }
            num_rows += 1;
        }
    }
    for i in 0..dim {
        for j in i + 1..dim {
            ata[i][j] = ata[j][i];
        }
    }
    Ok(NormalEquations {
        ata,
        atb,
        num_rows,
        band_count,
        cutoff_band,
        context_radius,
        config_hash,
    })
}

/// Solves the accumulated system for one ridge value. The bias diagonal
/// entry is left unregularized so the large-ridge limit degenerates to the
/// per-band target mean.
pub fn solve_ridge(normal: &NormalEquations, ridge: f64) -> Result<PredictorModel> {
    if ridge < 0.0 {
        return Err(Error::Contract("ridge must be non-negative"));
    }
    let dim = normal.ata.len();
    let high = normal.band_count - normal.cutoff_band;
    let mut a = normal.ata.clone();
    for (i, row) in a.iter_mut().enumerate().take(dim - 1) {
        row[i] += ridge;
    }
    // one rhs per high band
    let rhs: Vec<Vec<f64>> = (0..high)
        .map(|h| (0..dim).map(|i| normal.atb[i][h]).collect())
        .collect();
    let solutions = cholesky_solve(a, &rhs)?;
    let model = PredictorModel {
        band_count: normal.band_count,
        cutoff_band: normal.cutoff_band,
        context_radius: normal.context_radius,
        ridge,
        config_hash: normal.config_hash,
        weights: solutions,
    };
    model.validate()?;
    Ok(model)
}

/// Closed-form ridge training over the given pairs.
pub fn train_ridge(
    pairs: &[FeaturePair],
    context_radius: usize,
    ridge: f64,
    config_hash: u64,
) -> Result<PredictorModel> {
    let normal = accumulate_normal_equations(pairs, context_radius, config_hash)?;
    let dim = normal.ata.len();
    if normal.num_rows <= dim {
        return Err(Error::Contract("training requires more frames than feature dimensions"));
    }
    solve_ridge(&normal, ridge)
}

/// Applies the model: bands below the cutoff copied from the input, high
/// bands from the linear map on context windows.
pub fn predict(model: &PredictorModel, x: &CoarseSpectrum, config_hash: u64) -> Result<CoarseSpectrum> {
    model.validate()?;
    if x.band_count != model.band_count {
        return Err(Error::Contract("feature band count does not match model"));
    }
    if config_hash != model.config_hash {
        return Err(Error::Contract("feature config hash does not match model"));
    }
    let k = model.cutoff_band;
    let c = model.context_radius;
    let mut frames = Vec::with_capacity(x.num_frames());
    for t in 0..x.num_frames() {
        let ctx = context_row(x, t, c);
        let mut row = x.frames[t].clone();
        for (h, w) in model.weights.iter().enumerate() {
            row[k + h] = ctx.iter().zip(w).map(|(a, b)| a * b).sum();
        }
        frames.push(row);
    }
    Ok(CoarseSpectrum {
        frames,
        band_count: x.band_count,
        config: x.config,
        num_samples: x.num_samples,
    })
}
