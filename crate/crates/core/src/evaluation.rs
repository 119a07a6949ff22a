//! Reconstruction protocol and the linear/log amplitude error metrics.
//!
//! Frames are encoded to the mean-field hidden state and decoded to the
//! expected visible vector. Errors are measured after undoing the
//! normalization, in the original amplitude domain.

use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelParams};
use crate::training::NormalizationStats;

/// Reconstruction floor relative to the largest original amplitude, used
/// only to keep `log` defined for models that can output nonpositive bins.
pub const LOG_FLOOR_RATIO: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconReport {
    pub mse_amp: f64,
    pub mse_log: f64,
    pub negative_bin_count: usize,
    pub frames: usize,
}

/// Mean-field reconstruction in the normalized domain.
pub fn reconstruct(v: ArrayView2<f64>, params: &ModelParams) -> Result<Array2<f64>> {
    params.reconstruct(v)
}

fn check_same_shape(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::shape(format!(
            "original is {:?}, reconstruction is {:?}",
            a.dim(),
            b.dim()
        )));
    }
    if a.nrows() == 0 {
        return Err(Error::Empty("no frames to compare".into()));
    }
    Ok(())
}

/// `(1/N) Σ_n ‖v⁽ⁿ⁾ − v̂⁽ⁿ⁾‖²`.
pub fn mse_amp(orig: ArrayView2<f64>, recon: ArrayView2<f64>) -> Result<f64> {
    check_same_shape(orig, recon)?;
    let mut sum = 0.0;
    Zip::from(&orig).and(&recon).for_each(|&a, &b| sum += (a - b) * (a - b));
    Ok(sum / orig.nrows() as f64)
}

/// `(1/N) Σ_n ‖log|v⁽ⁿ⁾| − log|v̂⁽ⁿ⁾|‖²`; every entry must be positive.
pub fn mse_log(orig: ArrayView2<f64>, recon: ArrayView2<f64>) -> Result<f64> {
    check_same_shape(orig, recon)?;
    if let Some(bad) = orig.iter().chain(recon.iter()).find(|&&x| !(x > 0.0)) {
        return Err(Error::domain(format!(
            "log-amplitude error needs positive entries, got {bad}"
        )));
    }
    let mut sum = 0.0;
    Zip::from(&orig).and(&recon).for_each(|&a, &b| {
        let d = a.abs().ln() - b.abs().ln();
        sum += d * d;
    });
    Ok(sum / orig.nrows() as f64)
}

pub fn count_negative_bins(recon: ArrayView2<f64>) -> usize {
    recon.iter().filter(|&&x| x < 0.0).count()
}

/// Encode and decode `original` (amplitude domain) and score the result.
///
/// Non-gamma reconstructions are clamped at `LOG_FLOOR_RATIO × max(original)`
/// for `mse_log` only; `mse_amp` and the negative-bin count see the raw
/// output.
pub fn evaluate(params: &ModelParams, original: ArrayView2<f64>, stats: &NormalizationStats) -> Result<ReconReport> {
    let normalized = stats.apply(original)?;
    let recon = stats.invert(params.reconstruct(normalized.view())?.view())?;
    score(params.kind(), original, recon.view())
}

/// Metrics for an already denormalized reconstruction.
pub fn score(kind: ModelKind, original: ArrayView2<f64>, recon: ArrayView2<f64>) -> Result<ReconReport> {
    let amp = mse_amp(original, recon)?;
    let log = if kind == ModelKind::Gamma {
        mse_log(original, recon)?
    } else {
        let floor = log_floor(original);
        mse_log(original, recon.mapv(|x| x.max(floor)).view())?
    };
    Ok(ReconReport {
        mse_amp: amp,
        mse_log: log,
        negative_bin_count: count_negative_bins(recon),
        frames: original.nrows(),
    })
}

pub fn log_floor(original: ArrayView2<f64>) -> f64 {
    LOG_FLOOR_RATIO * original.iter().copied().fold(0.0, f64::max)
}
