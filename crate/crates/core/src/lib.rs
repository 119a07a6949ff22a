//! Restricted Boltzmann machines for amplitude spectrograms.
//!
//! The centrepiece is the gamma-Bernoulli RBM, whose visible units follow
//! gamma distributions and so stay positive while its energy couples both
//! linear and log amplitudes. Gaussian-Bernoulli and Bernoulli-Bernoulli
//! RBMs are included as baselines, together with the STFT front end, the
//! training loop and the reconstruction metrics used to compare them.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod error;
pub mod math;
pub mod models;

pub use error::{Error, Result};
pub mod dsp;
pub mod evaluation;
pub mod io;
pub mod training;
