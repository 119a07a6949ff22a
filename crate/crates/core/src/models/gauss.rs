//! Gaussian-Bernoulli RBM with energy
//! `½ vᵀΣ⁻¹v − vᵀWh − bᵀv − cᵀh`, `Σ = diag(exp(log_var))`.
//!
//! Under this energy the visible conditional has mean `Σ(b + Wh)` and
//! covariance `Σ`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{
    check_batch, check_enumerable, check_finite, check_vec, gray_walk, sample_bernoulli_matrix, softplus, standard,
    GrayAffine, LogSumExp, ModelKind, ParamSet, Rbm,
};
use crate::error::{Error, Result};
use crate::math::{sigmoid_scalar, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRbmParams {
    w: Array2<f64>,
    b: Array1<f64>,
    c: Array1<f64>,
    log_var: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussGrads {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub c: Array1<f64>,
    pub log_var: Array1<f64>,
}

impl GaussRbmParams {
    pub fn new(w: Array2<f64>, b: Array1<f64>, c: Array1<f64>, log_var: Array1<f64>) -> Result<Self> {
        let (i, j) = w.dim();
        if i == 0 || j == 0 {
            return Err(Error::shape(
                "Gaussian RBM needs at least one visible and one hidden unit",
            ));
        }
        check_vec(b.view(), i, "b")?;
        check_vec(c.view(), j, "c")?;
        check_vec(log_var.view(), i, "log_var")?;
        check_finite("W", w.iter())?;
        check_finite("b", b.iter())?;
        check_finite("c", c.iter())?;
        check_finite("log_var", log_var.iter())?;
        Ok(Self {
            w: standard(w),
            b,
            c,
            log_var,
        })
    }

    /// `W ~ N(0, 0.01)` (variance), zero biases, unit variances.
    pub fn init(visible: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        let w = Array2::from_shape_simple_fn((visible, hidden), || 0.1 * rng.standard_normal());
        Self::new(w, Array1::zeros(visible), Array1::zeros(hidden), Array1::zeros(visible))
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

    pub fn log_var(&self) -> &Array1<f64> {
        &self.log_var
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

    pub fn log_var_mut(&mut self) -> &mut Array1<f64> {
        &mut self.log_var
    }

    pub fn variance(&self) -> Array1<f64> {
        self.log_var.mapv(f64::exp)
    }

    /// Visible means `Σ(b + Wh)` per row of `h`.
    pub fn visible_mean(&self, h: ArrayView2<f64>) -> Array2<f64> {
        (h.dot(&self.w.t()) + &self.b) * &self.variance()
    }

    /// Per-unit `(mean, variance)` of `p(v | h)`.
    pub fn p_v_given_h(&self, h: ArrayView1<f64>) -> Result<Vec<(f64, f64)>> {
        check_vec(h, self.hidden_dim(), "h")?;
        let mean = self.visible_mean(h.insert_axis(Axis(0)));
        Ok(mean.iter().copied().zip(self.variance().iter().copied()).collect())
    }

    pub fn p_h_given_v(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.hidden_probs(v.insert_axis(Axis(0)))?.row(0).to_owned())
    }

    pub fn sample_visible(&self, h: ArrayView2<f64>, rng: &mut Rng) -> Array2<f64> {
        let std = self.log_var.mapv(|lv| (0.5 * lv).exp());
        let mut out = self.visible_mean(h);
        for mut row in out.rows_mut() {
            for (x, s) in row.iter_mut().zip(std.iter()) {
                *x += s * rng.standard_normal();
            }
        }
        out
    }

    fn suff_stats(&self, v: ArrayView2<f64>, p: &Array2<f64>) -> GaussGrads {
        let inv_var = self.log_var.mapv(|lv| (-lv).exp());
        GaussGrads {
            w: v.t().dot(p),
            b: v.sum_axis(Axis(0)),
            c: p.sum_axis(Axis(0)),
            log_var: v.mapv(|x| 0.5 * x * x).sum_axis(Axis(0)) * inv_var,
        }
    }

    pub(crate) fn cd_chain(&self, v: ArrayView2<f64>, rng: &mut Rng, k: usize) -> Result<GaussGrads> {
        let n = v.nrows() as f64;
        let p_data = self.hidden_probs(v)?;
        let data = self.suff_stats(v, &p_data);
        let mut chain = v.to_owned();
        let mut p_chain = p_data;
        for _ in 0..k {
            let h = sample_bernoulli_matrix(&p_chain, rng);
            chain = self.sample_visible(h.view(), rng);
            p_chain = self.hidden_probs(chain.view())?;
        }
        let recon = self.suff_stats(chain.view(), &p_chain);
        Ok(GaussGrads {
            w: (data.w - recon.w) / n,
            b: (data.b - recon.b) / n,
            c: (data.c - recon.c) / n,
            log_var: (data.log_var - recon.log_var) / n,
        })
    }

    /// `log Z = logsumexp_h [½ I log 2π + ½ Σ log σ² + ½ mᵀΣm + cᵀh]`,
    /// `m = b + Wh`.
    pub fn log_partition(&self) -> Result<f64> {
        let j = self.hidden_dim();
        check_enumerable(j)?;
        let var = self.variance();
        let constant = 0.5 * self.visible_dim() as f64 * (2.0 * PI).ln() + 0.5 * self.log_var.sum();
        let mut m = GrayAffine::new(self.b.clone(), self.w.view());
        let c_row = self.c.view().insert_axis(Axis(0));
        let mut lin = GrayAffine::new(Array1::zeros(1), c_row);
        let mut acc = LogSumExp::new();
        gray_walk(j, |code, flipped| {
            let quad: f64 = m
                .update(code, flipped)
                .iter()
                .zip(var.iter())
                .map(|(x, s)| x * x * s)
                .sum();
            acc.add(constant + 0.5 * quad + lin.update(code, flipped)[0]);
            Ok(())
        })?;
        Ok(acc.value())
    }

    /// `log Σ_h exp(−E(v, h))` per row.
    pub fn log_unnormalized_marginal(&self, v: ArrayView2<f64>) -> Result<Array1<f64>> {
        self.validate_visible(v)?;
        let inv_var = self.log_var.mapv(|lv| (-lv).exp());
        let act = v.dot(&self.w) + &self.c;
        let quad = (v.mapv(|x| x * x) * &inv_var).sum_axis(Axis(1)) * -0.5 + v.dot(&self.b);
        Ok(quad + act.mapv(softplus).sum_axis(Axis(1)))
    }
}

impl ParamSet for GaussRbmParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("contiguous"),
            self.c.as_slice().expect("contiguous"),
            self.log_var.as_slice().expect("contiguous"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w.as_slice_mut().expect("standard layout"),
            self.b.as_slice_mut().expect("contiguous"),
            self.c.as_slice_mut().expect("contiguous"),
            self.log_var.as_slice_mut().expect("contiguous"),
        ]
    }
}

impl ParamSet for GaussGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("contiguous"),
            self.c.as_slice().expect("contiguous"),
            self.log_var.as_slice().expect("contiguous"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w.as_slice_mut().expect("standard layout"),
            self.b.as_slice_mut().expect("contiguous"),
            self.c.as_slice_mut().expect("contiguous"),
            self.log_var.as_slice_mut().expect("contiguous"),
        ]
    }
}

impl Rbm for GaussRbmParams {
    type Grads = GaussGrads;

    fn kind(&self) -> ModelKind {
        ModelKind::Gauss
    }

    fn visible_dim(&self) -> usize {
        self.w.nrows()
    }

    fn hidden_dim(&self) -> usize {
        self.w.ncols()
    }

    fn validate_visible(&self, v: ArrayView2<f64>) -> Result<()> {
        check_batch(v, self.visible_dim())?;
        check_finite("visible batch", v.iter())
    }

    fn energy(&self, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<f64> {
        check_vec(v, self.visible_dim(), "v")?;
        check_vec(h, self.hidden_dim(), "h")?;
        let inv_var = self.log_var.mapv(|lv| (-lv).exp());
        let quad = 0.5 * (&v * &v * &inv_var).sum();
        Ok(quad - v.dot(&self.w.dot(&h)) - self.b.dot(&v) - self.c.dot(&h))
    }

    fn hidden_probs(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.validate_visible(v)?;
        Ok((v.dot(&self.w) + &self.c).mapv(sigmoid_scalar))
    }

    fn neg_energy_grad(&self, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<GaussGrads> {
        check_vec(v, self.visible_dim(), "v")?;
        check_vec(h, self.hidden_dim(), "h")?;
        let inv_var = self.log_var.mapv(|lv| (-lv).exp());
        let w = standard(
            v.to_owned()
                .insert_axis(Axis(1))
                .dot(&h.to_owned().insert_axis(Axis(0))),
        );
        Ok(GaussGrads {
            w,
            b: v.to_owned(),
            c: h.to_owned(),
            log_var: v.mapv(|x| 0.5 * x * x) * inv_var,
        })
    }

    fn cd_gradients(&self, v: ArrayView2<f64>, rng: &mut Rng, k: usize) -> Result<GaussGrads> {
        if k == 0 {
            return Err(Error::Config("CD needs at least one Gibbs sweep".into()));
        }
        self.cd_chain(v, rng, k)
    }

    /// `Σ(b + W ĥ)` with `ĥ = p(h = 1 | v)`.
    fn reconstruct(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        let p = self.hidden_probs(v)?;
        Ok(self.visible_mean(p.view()))
    }

    fn exact_log_likelihood(&self, v: ArrayView2<f64>) -> Result<f64> {
        let log_z = self.log_partition()?;
        let marg = self.log_unnormalized_marginal(v)?;
        Ok(marg.mean().expect("validated nonempty") - log_z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn model(w: Array2<f64>, b: Array1<f64>, c: Array1<f64>, var: Array1<f64>) -> GaussRbmParams {
        GaussRbmParams::new(w, b, c, var.mapv(f64::ln)).unwrap()
    }

    #[test]
    fn energy_examples() {
        let m = model(array![[0.3]], array![0.0], array![0.0], array![1.0]);
        assert_eq!(m.energy(array![0.0].view(), array![0.0].view()).unwrap(), 0.0);
        assert!((m.energy(array![1.0].view(), array![0.0].view()).unwrap() - 0.5).abs() < 1e-15);
        let m = model(array![[1.0]], array![1.0], array![1.0], array![4.0]);
        assert!((m.energy(array![2.0].view(), array![1.0].view()).unwrap() + 4.5).abs() < 1e-15);
    }

    #[test]
    fn conditional_examples() {
        let m = model(array![[0.0, 0.0]], array![0.0], array![0.0, 0.0], array![1.0]);
        assert_eq!(m.p_h_given_v(array![0.0].view()).unwrap().to_vec(), vec![0.5, 0.5]);
        let m = model(array![[2.0]], array![0.0], array![-2.0], array![1.0]);
        assert_eq!(m.p_h_given_v(array![1.0].view()).unwrap()[0], 0.5);

        let m = model(array![[1.0]], array![0.0], array![0.0], array![1.0]);
        assert_eq!(m.p_v_given_h(array![0.0].view()).unwrap()[0].0, 0.0);
        let m = model(array![[1.0]], array![1.0], array![0.0], array![2.0]);
        let (mean, var) = m.p_v_given_h(array![1.0].view()).unwrap()[0];
        assert!((mean - 4.0).abs() < 1e-14);
        assert!((var - 2.0).abs() < 1e-14);
    }

    #[test]
    fn partition_unit_example() {
        let m = model(array![[0.0]], array![0.0], array![0.0], array![1.0]);
        let z = m.log_partition().unwrap().exp();
        assert!((z - 2.0 * (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn suppressed_hiddens_reduce_to_gaussian() {
        // c → −∞ switches every hidden unit off; what is left is N(Σb, Σ).
        let m = model(
            array![[0.7, -0.4], [0.2, 0.9]],
            array![0.5, -1.0],
            array![-1e6, -1e6],
            array![0.5, 2.0],
        );
        let v = array![[0.3, -1.2]];
        let ll = m.exact_log_likelihood(v.view()).unwrap();
        let mut want = 0.0;
        for (x, (b, s2)) in [0.3, -1.2].iter().zip([(0.5, 0.5), (-1.0, 2.0)]) {
            let mu: f64 = s2 * b;
            want += -0.5 * (2.0 * PI * s2).ln() - (x - mu).powi(2) / (2.0 * s2);
        }
        assert!((ll - want).abs() < 1e-10, "{ll} vs {want}");
    }

    #[test]
    fn b_gradient_is_mean_difference() {
        let mut rng = Rng::new(8, 0);
        let m = GaussRbmParams::init(3, 2, &mut rng).unwrap();
        let v = array![[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]];
        // Replay the chain by hand with a cloned stream.
        let mut r1 = Rng::new(8, 5);
        let mut r2 = r1.clone();
        let g = m.cd_gradients(v.view(), &mut r1, 1).unwrap();
        let p = m.hidden_probs(v.view()).unwrap();
        let h = sample_bernoulli_matrix(&p, &mut r2);
        let recon = m.sample_visible(h.view(), &mut r2);
        let want = v.mean_axis(Axis(0)).unwrap() - recon.mean_axis(Axis(0)).unwrap();
        for (a, b) in g.b.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn chain_at_data_gives_zero() {
        let mut rng = Rng::new(8, 0);
        let m = GaussRbmParams::init(3, 2, &mut rng).unwrap();
        let v = array![[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]];
        let g = m.cd_chain(v.view(), &mut rng, 0).unwrap();
        assert!(g.tensors().iter().all(|t| t.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn degenerate_reconstruction_is_zero() {
        let m = model(array![[0.0, 0.0]], array![0.0], array![1.0, -1.0], array![3.0]);
        let r = m.reconstruct(array![[5.0], [-2.0]].view()).unwrap();
        assert!(r.iter().all(|&x| x == 0.0));
    }
}
