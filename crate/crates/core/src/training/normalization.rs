//! Per-dimension normalization fitted on training data.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::models::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationKind {
    /// `x̃ = α x / x̄`, so that a gamma with shape α has unit rate.
    GammaScale,
    /// Zero mean, unit (population) standard deviation.
    GaussianStandardize,
    /// `x̃ = x / max(x)` per dimension, mapping positive data into `(0, 1]`.
    UnitRange,
}

impl NormalizationKind {
    pub fn for_model(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Gamma => NormalizationKind::GammaScale,
            ModelKind::Gauss => NormalizationKind::GaussianStandardize,
            ModelKind::Bern => NormalizationKind::UnitRange,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormalizationStats {
    GammaScale { mean: Array1<f64>, alpha_norm: f64 },
    GaussianStandardize { mean: Array1<f64>, std: Array1<f64> },
    UnitRange { max: Array1<f64> },
}

impl NormalizationStats {
    pub fn fit(data: ArrayView2<f64>, kind: NormalizationKind) -> Result<Self> {
        match kind {
            NormalizationKind::GammaScale => Self::fit_gamma(data, 1.0),
            NormalizationKind::GaussianStandardize => Self::fit_gaussian(data),
            NormalizationKind::UnitRange => Self::fit_unit_range(data),
        }
    }

    pub fn fit_gamma(data: ArrayView2<f64>, alpha_norm: f64) -> Result<Self> {
        check_nonempty(data)?;
        if !(alpha_norm > 0.0 && alpha_norm.is_finite()) {
            return Err(Error::domain(format!("alpha_norm must be positive, got {alpha_norm}")));
        }
        check_positive(data)?;
        let mean = data.mean_axis(Axis(0)).expect("nonempty");
        Ok(NormalizationStats::GammaScale { mean, alpha_norm })
    }

    pub fn fit_gaussian(data: ArrayView2<f64>) -> Result<Self> {
        check_nonempty(data)?;
        let mean = data.mean_axis(Axis(0)).expect("nonempty");
        let std = data.std_axis(Axis(0), 0.0);
        if let Some((i, _)) = std.iter().enumerate().find(|(_, &s)| !(s > 0.0)) {
            return Err(Error::domain(format!("dimension {i} has zero variance")));
        }
        Ok(NormalizationStats::GaussianStandardize { mean, std })
    }

    pub fn fit_unit_range(data: ArrayView2<f64>) -> Result<Self> {
        check_nonempty(data)?;
        check_positive(data)?;
        let max = data.fold_axis(Axis(0), f64::NEG_INFINITY, |&a, &b| a.max(b));
        Ok(NormalizationStats::UnitRange { max })
    }

    pub fn kind(&self) -> NormalizationKind {
        match self {
            NormalizationStats::GammaScale { .. } => NormalizationKind::GammaScale,
            NormalizationStats::GaussianStandardize { .. } => NormalizationKind::GaussianStandardize,
            NormalizationStats::UnitRange { .. } => NormalizationKind::UnitRange,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NormalizationStats::GammaScale { mean, .. } => mean.len(),
            NormalizationStats::GaussianStandardize { mean, .. } => mean.len(),
            NormalizationStats::UnitRange { max } => max.len(),
        }
    }

    fn check_dim(&self, data: ArrayView2<f64>) -> Result<()> {
        if data.ncols() != self.dim() {
            return Err(Error::shape(format!(
                "data has {} dimensions, normalization was fitted on {}",
                data.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, data: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_dim(data)?;
        Ok(match self {
            NormalizationStats::GammaScale { mean, alpha_norm } => {
                let scale = mean.mapv(|m| alpha_norm / m);
                &data * &scale
            }
            NormalizationStats::GaussianStandardize { mean, std } => (&data - mean) / std,
            NormalizationStats::UnitRange { max } => &data / max,
        })
    }

    pub fn invert(&self, data: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_dim(data)?;
        Ok(match self {
            NormalizationStats::GammaScale { mean, alpha_norm } => {
                let scale = mean.mapv(|m| m / alpha_norm);
                &data * &scale
            }
            NormalizationStats::GaussianStandardize { mean, std } => &data * std + mean,
            NormalizationStats::UnitRange { max } => &data * max,
        })
    }
}

fn check_nonempty(data: ArrayView2<f64>) -> Result<()> {
    if data.nrows() == 0 || data.ncols() == 0 {
        return Err(Error::Empty("cannot fit normalization on an empty batch".into()));
    }
    Ok(())
}

fn check_positive(data: ArrayView2<f64>) -> Result<()> {
    if let Some(bad) = data.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!(
            "normalization needs strictly positive data, got {bad}"
        )));
    }
    Ok(())
}
