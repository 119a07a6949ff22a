//! Minibatch CD-k training with Adam.
//!
//! Each epoch shuffles the training rows, walks them in minibatches
//! (the last, possibly short, batch included), takes one Adam ascent step
//! per batch and then logs reconstruction metrics on the evaluation set,
//! or on the training set when none is given. Exact log-likelihood is
//! logged too when the model is small enough to enumerate.
//!
//! Random streams are derived from `(seed, 4·stream + k)`: `k = 0` for
//! initialization, `1` for shuffling and `2` for Gibbs sampling.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::evaluation;
use crate::math::Rng;
use crate::models::{ModelKind, ModelParams, Rbm, DEFAULT_EPSILON};

mod adam;
mod normalization;

pub use adam::{AdamConfig, AdamState};
pub use normalization::{NormalizationKind, NormalizationStats};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub cd_k: usize,
    pub hidden_units: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Shape shift ε of the gamma model; ignored by the other kinds.
    pub epsilon: f64,
    /// Stream offset separating otherwise identical runs (hidden-size sweeps).
    pub stream: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 100,
            learning_rate: 0.01,
            epochs: 100,
            cd_k: 1,
            hidden_units: 100,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            epsilon: DEFAULT_EPSILON,
            stream: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.batch_size == 0 {
            return fail("batch size must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.cd_k == 0 {
            return fail("cd_k must be at least 1".into());
        }
        if self.hidden_units == 0 {
            return fail("hidden_units must be positive".into());
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {b}"));
            }
        }
        if !(self.adam_eps > 0.0) {
            return fail(format!("adam_eps must be positive, got {}", self.adam_eps));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }

    fn rng(&self, purpose: u64) -> Rng {
        Rng::new(self.seed, self.stream.wrapping_mul(4).wrapping_add(purpose))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub mse_amp: f64,
    pub mse_log: f64,
    pub exact_ll: Option<f64>,
}

pub type MetricsLog = Vec<EpochMetrics>;

/// Data the per-epoch metrics are computed on.
#[derive(Debug, Clone, Copy)]
pub struct MetricSet<'a> {
    /// Frames in the original amplitude domain.
    pub original: ArrayView2<'a, f64>,
    pub stats: &'a NormalizationStats,
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub params: ModelParams,
    pub stats: NormalizationStats,
    pub log: MetricsLog,
    pub adam_steps: u64,
}

/// Fit normalization on `train`, initialize a model of `kind` and train it.
///
/// Both `train` and `eval` are in the original amplitude domain. Metrics
/// are computed on `eval` when present, otherwise on `train`.
pub fn train(
    train: ArrayView2<f64>,
    eval: Option<ArrayView2<f64>>,
    kind: ModelKind,
    cfg: &TrainConfig,
) -> Result<TrainRun> {
    cfg.validate()?;
    let stats = NormalizationStats::fit(train, NormalizationKind::for_model(kind))?;
    let normalized = stats.apply(train)?;
    let init = ModelParams::init(kind, train.ncols(), cfg.hidden_units, cfg.epsilon, &mut cfg.rng(0))?;
    let metrics = MetricSet {
        original: eval.unwrap_or(train),
        stats: &stats,
    };
    let (params, log, adam_steps) = train_params(init, normalized.view(), Some(metrics), cfg)?;
    Ok(TrainRun {
        params,
        stats,
        log,
        adam_steps,
    })
}

/// Train an existing model on already normalized data.
///
/// Returns the trained model, the per-epoch log and the number of Adam
/// steps taken.
pub fn train_params(
    init: ModelParams,
    data: ArrayView2<f64>,
    metrics: Option<MetricSet<'_>>,
    cfg: &TrainConfig,
) -> Result<(ModelParams, MetricsLog, u64)> {
    cfg.validate()?;
    match init {
        ModelParams::Gamma(m) => run(m, data, metrics, cfg, ModelParams::Gamma),
        ModelParams::Gauss(m) => run(m, data, metrics, cfg, ModelParams::Gauss),
        ModelParams::Bern(m) => run(m, data, metrics, cfg, ModelParams::Bern),
    }
}

fn run<M: Rbm>(
    mut model: M,
    data: ArrayView2<f64>,
    metrics: Option<MetricSet<'_>>,
    cfg: &TrainConfig,
    wrap: fn(M) -> ModelParams,
) -> Result<(ModelParams, MetricsLog, u64)> {
    model.validate_visible(data)?;
    let metric_input = match &metrics {
        Some(m) => Some(m.stats.apply(m.original)?),
        None => None,
    };

    let mut shuffle_rng = cfg.rng(1);
    let mut gibbs_rng = cfg.rng(2);
    let adam_cfg = cfg.adam();
    let mut adam = AdamState::new(&model);
    let mut order: Vec<usize> = (0..data.nrows()).collect();
    let mut log = MetricsLog::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let at = |source: Error| Error::Training {
                epoch,
                batch,
                source: Box::new(source),
            };
            let minibatch: Array2<f64> = data.select(Axis(0), idx);
            let grads = model
                .cd_gradients(minibatch.view(), &mut gibbs_rng, cfg.cd_k)
                .map_err(at)?;
            if !crate::models::ParamSet::is_finite(&grads) {
                return Err(at(Error::domain("non-finite gradient")));
            }
            adam.update(&mut model, &grads, &adam_cfg).map_err(at)?;
        }

        if let (Some(m), Some(input)) = (&metrics, &metric_input) {
            let at = |source: Error| Error::Training {
                epoch,
                batch: 0,
                source: Box::new(source),
            };
            let recon = m.stats.invert(model.reconstruct(input.view()).map_err(at)?.view())?;
            let report = evaluation::score(model.kind(), m.original, recon.view()).map_err(at)?;
            let exact_ll = if model.supports_exact_likelihood() {
                Some(model.exact_log_likelihood(input.view()).map_err(at)?)
            } else {
                None
            };
            log.push(EpochMetrics {
                epoch,
                mse_amp: report.mse_amp,
                mse_log: report.mse_log,
                exact_ll,
            });
        }
    }
    Ok((wrap(model), log, adam.step_count()))
}
