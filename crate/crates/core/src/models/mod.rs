//! Energy-based models: the gamma-Bernoulli RBM and its Gaussian-Bernoulli
//! and Bernoulli-Bernoulli baselines, plus the unrestricted energies they
//! are carved out of.
//!
//! All three RBMs share one calling convention. Batches are `N × I`
//! visible matrices and `N × J` hidden matrices, weights are `I × J`.
//! Gradients are returned as the *ascent* direction of the log-likelihood,
//! i.e. `⟨−∂E/∂θ⟩_data − ⟨−∂E/∂θ⟩_recon`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::math::Rng;

mod bern;
mod gamma;
mod gauss;
mod general;

pub use bern::{BernGrads, BernRbmParams};
pub use gamma::{GammaGrads, GammaRbmParams};
pub use gauss::{GaussGrads, GaussRbmParams};
pub use general::{general_energy, general_gamma_energy, GammaBlocks};

/// Exact enumeration over `2^J` hidden states is refused above this.
pub const MAX_EXACT_HIDDEN: usize = 20;

/// Default shape shift for training gamma models.
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Gamma,
    Gauss,
    Bern,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gamma => "gamma",
            ModelKind::Gauss => "gauss",
            ModelKind::Bern => "bern",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(ModelKind::Gamma),
            "gauss" => Ok(ModelKind::Gauss),
            "bern" => Ok(ModelKind::Bern),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Flat access to the trainable tensors of a parameter or gradient set, in
/// a fixed declared order.
pub trait ParamSet {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}

/// Shared surface of the three restricted Boltzmann machines.
pub trait Rbm: ParamSet + Clone {
    type Grads: ParamSet;

    fn kind(&self) -> ModelKind;
    fn visible_dim(&self) -> usize;
    fn hidden_dim(&self) -> usize;

    /// Checks that a visible batch lies in the support of the model.
    fn validate_visible(&self, v: ArrayView2<f64>) -> Result<()>;

    fn energy(&self, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<f64>;

    /// `p(h_j = 1 | v)` for every row of the batch.
    fn hidden_probs(&self, v: ArrayView2<f64>) -> Result<Array2<f64>>;

    /// Per-sample `−∂E/∂θ` at a fixed `(v, h)`; `h` may be fractional.
    fn neg_energy_grad(&self, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<Self::Grads>;

    /// CD-k estimate of the log-likelihood gradient.
    fn cd_gradients(&self, v: ArrayView2<f64>, rng: &mut Rng, k: usize) -> Result<Self::Grads>;

    /// Mean-field reconstruction: expected `v` under `p(v | E[h | v])`.
    fn reconstruct(&self, v: ArrayView2<f64>) -> Result<Array2<f64>>;

    /// Mean exact log-likelihood, enumerating all hidden states.
    fn exact_log_likelihood(&self, v: ArrayView2<f64>) -> Result<f64>;

    /// Whether [`exact_log_likelihood`](Rbm::exact_log_likelihood) is
    /// available for this model.
    fn supports_exact_likelihood(&self) -> bool {
        self.hidden_dim() <= MAX_EXACT_HIDDEN
    }
}

/// A trained model of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Gamma(GammaRbmParams),
    Gauss(GaussRbmParams),
    Bern(BernRbmParams),
}

macro_rules! dispatch {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            ModelParams::Gamma($m) => $body,
            ModelParams::Gauss($m) => $body,
            ModelParams::Bern($m) => $body,
        }
    };
}

impl ModelParams {
    /// Freshly initialized model of the requested kind.
    pub fn init(kind: ModelKind, visible: usize, hidden: usize, epsilon: f64, rng: &mut Rng) -> Result<Self> {
        Ok(match kind {
            ModelKind::Gamma => ModelParams::Gamma(GammaRbmParams::init(visible, hidden, epsilon, rng)?),
            ModelKind::Gauss => ModelParams::Gauss(GaussRbmParams::init(visible, hidden, rng)?),
            ModelKind::Bern => ModelParams::Bern(BernRbmParams::init(visible, hidden, rng)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        dispatch!(self, m => m.kind())
    }

    pub fn visible_dim(&self) -> usize {
        dispatch!(self, m => m.visible_dim())
    }

    pub fn hidden_dim(&self) -> usize {
        dispatch!(self, m => m.hidden_dim())
    }

    pub fn validate_visible(&self, v: ArrayView2<f64>) -> Result<()> {
        dispatch!(self, m => m.validate_visible(v))
    }

    pub fn hidden_probs(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        dispatch!(self, m => m.hidden_probs(v))
    }

    pub fn reconstruct(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        dispatch!(self, m => m.reconstruct(v))
    }

    pub fn exact_log_likelihood(&self, v: ArrayView2<f64>) -> Result<f64> {
        dispatch!(self, m => m.exact_log_likelihood(v))
    }

    pub fn supports_exact_likelihood(&self) -> bool {
        dispatch!(self, m => m.supports_exact_likelihood())
    }

    pub fn is_finite(&self) -> bool {
        dispatch!(self, m => m.is_finite())
    }
}

pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Streaming log-sum-exp for sums too long to buffer.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        if x.is_nan() {
            self.sum = f64::NAN;
        } else if x == f64::NEG_INFINITY {
        } else if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            return self.max;
        }
        self.max + self.sum.ln()
    }
}

/// Visits all `2^J` hidden states in reflected Gray-code order starting at
/// `h = 0`. Each call gets the state code and the unit that just flipped.
pub(crate) fn gray_walk(hidden: usize, mut visit: impl FnMut(u64, Option<usize>) -> Result<()>) -> Result<()> {
    visit(0, None)?;
    for i in 1..(1u64 << hidden) {
        visit(i ^ (i >> 1), Some(i.trailing_zeros() as usize))?;
    }
    Ok(())
}

/// Flips of units at or above this index recompute from scratch, bounding
/// round-off drift to at most 256 incremental updates.
const RESYNC_UNIT: usize = 8;

/// `base + M h` kept current along a [`gray_walk`].
pub(crate) struct GrayAffine {
    base: Array1<f64>,
    /// `Mᵀ`, so that column `j` of `M` is a contiguous row.
    cols: Array2<f64>,
    cur: Array1<f64>,
}

impl GrayAffine {
    pub(crate) fn new(base: Array1<f64>, m: ArrayView2<f64>) -> Self {
        Self {
            cur: base.clone(),
            cols: m.t().as_standard_layout().into_owned(),
            base,
        }
    }

    pub(crate) fn update(&mut self, code: u64, flipped: Option<usize>) -> &Array1<f64> {
        match flipped {
            Some(u) if u < RESYNC_UNIT => {
                let col = self.cols.row(u);
                if (code >> u) & 1 == 1 {
                    self.cur += &col;
                } else {
                    self.cur -= &col;
                }
            }
            _ => {
                self.cur.assign(&self.base);
                for (j, col) in self.cols.rows().into_iter().enumerate() {
                    if (code >> j) & 1 == 1 {
                        self.cur += &col;
                    }
                }
            }
        }
        &self.cur
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Hidden configuration number `code` as a 0/1 vector, bit `j` → unit `j`.
pub(crate) fn hidden_state(code: u64, hidden: usize) -> Array1<f64> {
    Array1::from_shape_fn(hidden, |j| ((code >> j) & 1) as f64)
}

pub(crate) fn check_enumerable(hidden: usize) -> Result<()> {
    if hidden > MAX_EXACT_HIDDEN {
        return Err(Error::Enumeration(format!(
            "{hidden} hidden units exceed the limit of {MAX_EXACT_HIDDEN}"
        )));
    }
    Ok(())
}

pub(crate) fn check_batch(v: ArrayView2<f64>, visible: usize) -> Result<()> {
    if v.ncols() != visible {
        return Err(Error::shape(format!(
            "visible batch has {} columns, model expects {visible}",
            v.ncols()
        )));
    }
    if v.nrows() == 0 {
        return Err(Error::Empty("visible batch has no rows".into()));
    }
    Ok(())
}

pub(crate) fn check_vec(x: ArrayView1<f64>, len: usize, what: &str) -> Result<()> {
    if x.len() != len {
        return Err(Error::shape(format!("{what} has length {}, expected {len}", x.len())));
    }
    Ok(())
}

pub(crate) fn check_finite<'a>(name: &str, mut values: impl Iterator<Item = &'a f64>) -> Result<()> {
    if values.any(|x| !x.is_finite()) {
        return Err(Error::domain(format!("{name} contains non-finite entries")));
    }
    Ok(())
}

pub(crate) fn standard<T: Clone>(a: Array2<T>) -> Array2<T> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

/// Draw a 0/1 matrix with the given per-entry probabilities.
pub(crate) fn sample_bernoulli_matrix(probs: &Array2<f64>, rng: &mut Rng) -> Array2<f64> {
    probs.mapv(|p| crate::math::bernoulli_draw(rng, p))
}
