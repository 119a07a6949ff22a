//! Bernoulli-Bernoulli RBM, `E(v, h) = −vᵀWh − bᵀv − cᵀh`.
//!
//! Visibles may be fractional in `[0, 1]` (treated as probabilities), which
//! is how real-valued spectra are fed to this baseline.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{
    check_batch, check_enumerable, check_finite, check_vec, gray_walk, sample_bernoulli_matrix, softplus, standard,
    GrayAffine, LogSumExp, ModelKind, ParamSet, Rbm,
};
use crate::error::{Error, Result};
use crate::math::{sigmoid_scalar, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct BernRbmParams {
    w: Array2<f64>,
    b: Array1<f64>,
    c: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernGrads {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub c: Array1<f64>,
}

impl BernRbmParams {
    pub fn new(w: Array2<f64>, b: Array1<f64>, c: Array1<f64>) -> Result<Self> {
        let (i, j) = w.dim();
        if i == 0 || j == 0 {
            return Err(Error::shape(
                "Bernoulli RBM needs at least one visible and one hidden unit",
            ));
        }
        check_vec(b.view(), i, "b")?;
        check_vec(c.view(), j, "c")?;
        check_finite("W", w.iter())?;
        check_finite("b", b.iter())?;
        check_finite("c", c.iter())?;
        Ok(Self { w: standard(w), b, c })
    }

    pub fn init(visible: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        let w = Array2::from_shape_simple_fn((visible, hidden), || 0.1 * rng.standard_normal());
        Self::new(w, Array1::zeros(visible), Array1::zeros(hidden))
    }

    pub fn w(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn b(&self) -> &Array1<f64> {
        &self.b
    }

    pub fn c(&self) -> &Array1<f64> {
        &self.c
    }

    pub fn w_mut(&mut self) -> &mut Array2<f64> {
        &mut self.w
    }

    pub fn b_mut(&mut self) -> &mut Array1<f64> {
        &mut self.b
    }

    pub fn c_mut(&mut self) -> &mut Array1<f64> {
        &mut self.c
    }

    /// `σ(b + Wh)` per row of `h`.
    pub fn visible_probs(&self, h: ArrayView2<f64>) -> Array2<f64> {
        (h.dot(&self.w.t()) + &self.b).mapv(sigmoid_scalar)
    }

    pub fn p_v_given_h(&self, h: ArrayView1<f64>) -> Result<Array1<f64>> {
        check_vec(h, self.hidden_dim(), "h")?;
        Ok(self.visible_probs(h.insert_axis(Axis(0))).row(0).to_owned())
    }

    pub fn p_h_given_v(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.hidden_probs(v.insert_axis(Axis(0)))?.row(0).to_owned())
    }

    fn suff_stats(v: ArrayView2<f64>, p: &Array2<f64>) -> BernGrads {
        BernGrads {
            w: v.t().dot(p),
            b: v.sum_axis(Axis(0)),
            c: p.sum_axis(Axis(0)),
        }
    }

    pub(crate) fn cd_chain(&self, v: ArrayView2<f64>, rng: &mut Rng, k: usize) -> Result<BernGrads> {
        let n = v.nrows() as f64;
        let p_data = self.hidden_probs(v)?;
        let data = Self::suff_stats(v, &p_data);
        let mut chain = v.to_owned();
        let mut p_chain = p_data;
        for _ in 0..k {
            let h = sample_bernoulli_matrix(&p_chain, rng);
            chain = sample_bernoulli_matrix(&self.visible_probs(h.view()), rng);
            p_chain = self.hidden_probs(chain.view())?;
        }
        let recon = Self::suff_stats(chain.view(), &p_chain);
        Ok(BernGrads {
            w: (data.w - recon.w) / n,
            b: (data.b - recon.b) / n,
            c: (data.c - recon.c) / n,
        })
    }

    /// `log Z = logsumexp_h [cᵀh + Σ_i softplus(b_i + (Wh)_i)]`.
    pub fn log_partition(&self) -> Result<f64> {
        let j = self.hidden_dim();
        check_enumerable(j)?;
        let mut act = GrayAffine::new(self.b.clone(), self.w.view());
        let c_row = self.c.view().insert_axis(Axis(0));
        let mut lin = GrayAffine::new(Array1::zeros(1), c_row);
        let mut acc = LogSumExp::new();
        gray_walk(j, |code, flipped| {
            let sp: f64 = act.update(code, flipped).iter().map(|&x| softplus(x)).sum();
            acc.add(lin.update(code, flipped)[0] + sp);
            Ok(())
        })?;
        Ok(acc.value())
    }

    pub fn log_unnormalized_marginal(&self, v: ArrayView2<f64>) -> Result<Array1<f64>> {
        self.validate_visible(v)?;
        let act = v.dot(&self.w) + &self.c;
        Ok(v.dot(&self.b) + act.mapv(softplus).sum_axis(Axis(1)))
    }
}

impl ParamSet for BernRbmParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("contiguous"),
            self.c.as_slice().expect("contiguous"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w.as_slice_mut().expect("standard layout"),
            self.b.as_slice_mut().expect("contiguous"),
            self.c.as_slice_mut().expect("contiguous"),
        ]
    }
}

impl ParamSet for BernGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("contiguous"),
            self.c.as_slice().expect("contiguous"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w.as_slice_mut().expect("standard layout"),
            self.b.as_slice_mut().expect("contiguous"),
            self.c.as_slice_mut().expect("contiguous"),
        ]
    }
}

impl Rbm for BernRbmParams {
    type Grads = BernGrads;

    fn kind(&self) -> ModelKind {
        ModelKind::Bern
    }

    fn visible_dim(&self) -> usize {
        self.w.nrows()
    }

    fn hidden_dim(&self) -> usize {
        self.w.ncols()
    }

    fn validate_visible(&self, v: ArrayView2<f64>) -> Result<()> {
        check_batch(v, self.visible_dim())?;
        if let Some(bad) = v.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::domain(format!(
                "Bernoulli visibles must lie in [0, 1], got {bad}"
            )));
        }
        Ok(())
    }

    fn energy(&self, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<f64> {
        check_vec(v, self.visible_dim(), "v")?;
        check_vec(h, self.hidden_dim(), "h")?;
        Ok(-v.dot(&self.w.dot(&h)) - self.b.dot(&v) - self.c.dot(&h))
    }

    fn hidden_probs(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.validate_visible(v)?;
        Ok((v.dot(&self.w) + &self.c).mapv(sigmoid_scalar))
    }

    fn neg_energy_grad(&self, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<BernGrads> {
        check_vec(v, self.visible_dim(), "v")?;
        check_vec(h, self.hidden_dim(), "h")?;
        Ok(BernGrads {
            w: standard(
                v.to_owned()
                    .insert_axis(Axis(1))
                    .dot(&h.to_owned().insert_axis(Axis(0))),
            ),
            b: v.to_owned(),
            c: h.to_owned(),
        })
    }

    fn cd_gradients(&self, v: ArrayView2<f64>, rng: &mut Rng, k: usize) -> Result<BernGrads> {
        if k == 0 {
            return Err(Error::Config("CD needs at least one Gibbs sweep".into()));
        }
        self.cd_chain(v, rng, k)
    }

    fn reconstruct(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        let p = self.hidden_probs(v)?;
        Ok(self.visible_probs(p.view()))
    }

    fn exact_log_likelihood(&self, v: ArrayView2<f64>) -> Result<f64> {
        let log_z = self.log_partition()?;
        let marg = self.log_unnormalized_marginal(v)?;
        Ok(marg.mean().expect("validated nonempty") - log_z)
    }
}
