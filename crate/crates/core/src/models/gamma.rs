//! Gamma-Bernoulli RBM.
//!
//! Energy over positive visibles `v` and hidden units `h`:
//!
//! ```text
//! E(v, h) = −vᵀ W exp(h) − cᵀ exp(h) − log(v)ᵀ (V h − (1 − ε) 1) − dᵀ h
//! ```
//!
//! with `W = −exp(W̃)` and `V = exp(Ṽ)`, so the visible conditional is an
//! independent gamma per unit with shape `V h + ε` and rate `−W exp(h)`,
//! and the hidden conditional is Bernoulli with logit
//! `(e − 1)(c + Wᵀv) + d + Vᵀ log(v)`.

use std::f64::consts::E;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{
    check_batch, check_enumerable, check_finite, check_vec, gray_walk, hidden_state, log_sum_exp,
    sample_bernoulli_matrix, standard, GrayAffine, LogSumExp, ModelKind, ParamSet, Rbm,
};
use crate::error::{Error, Result};
use crate::math::{gamma_sample, log_gamma_fn, sigmoid_scalar, GammaParams, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct GammaRbmParams {
    w_tilde: Array2<f64>,
    v_tilde: Array2<f64>,
    c: Array1<f64>,
    d: Array1<f64>,
    epsilon: f64,
}

/// Ascent direction over `(W̃, Ṽ, c, d)`; `ε` is not trained.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaGrads {
    pub w_tilde: Array2<f64>,
    pub v_tilde: Array2<f64>,
    pub c: Array1<f64>,
    pub d: Array1<f64>,
}

impl GammaRbmParams {
    pub fn new(
        w_tilde: Array2<f64>,
        v_tilde: Array2<f64>,
        c: Array1<f64>,
        d: Array1<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let (i, j) = w_tilde.dim();
        if i == 0 || j == 0 {
            return Err(Error::shape("gamma RBM needs at least one visible and one hidden unit"));
        }
        if v_tilde.dim() != (i, j) {
            return Err(Error::shape(format!("Ṽ is {:?}, W̃ is {:?}", v_tilde.dim(), (i, j))));
        }
        check_vec(c.view(), j, "c")?;
        check_vec(d.view(), j, "d")?;
        check_finite("W̃", w_tilde.iter())?;
        check_finite("Ṽ", v_tilde.iter())?;
        check_finite("c", c.iter())?;
        check_finite("d", d.iter())?;
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!(
                "ε must be a nonnegative finite number, got {epsilon}"
            )));
        }
        Ok(Self {
            w_tilde: standard(w_tilde),
            v_tilde: standard(v_tilde),
            c,
            d,
            epsilon,
        })
    }

    /// W̃ and Ṽ start near `−½ log I` (so `|W|, V ≈ 1/√I`) with ±0.01
    /// uniform jitter; biases start at zero.
    pub fn init(visible: usize, hidden: usize, epsilon: f64, rng: &mut Rng) -> Result<Self> {
        let centre = -0.5 * (visible.max(1) as f64).ln();
        let mut jitter = || centre + 0.02 * (rng.uniform() - 0.5);
        let w_tilde = Array2::from_shape_simple_fn((visible, hidden), &mut jitter);
        let v_tilde = Array2::from_shape_simple_fn((visible, hidden), &mut jitter);
        Self::new(w_tilde, v_tilde, Array1::zeros(hidden), Array1::zeros(hidden), epsilon)
    }

    pub fn w_tilde(&self) -> &Array2<f64> {
        &self.w_tilde
    }

    pub fn v_tilde(&self) -> &Array2<f64> {
        &self.v_tilde
    }

    pub fn c(&self) -> &Array1<f64> {
        &self.c
    }

    pub fn d(&self) -> &Array1<f64> {
        &self.d
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn w_tilde_mut(&mut self) -> &mut Array2<f64> {
        &mut self.w_tilde
    }

    pub fn v_tilde_mut(&mut self) -> &mut Array2<f64> {
        &mut self.v_tilde
    }

    pub fn c_mut(&mut self) -> &mut Array1<f64> {
        &mut self.c
    }

    pub fn d_mut(&mut self) -> &mut Array1<f64> {
        &mut self.d
    }

    /// `W = −exp(W̃)`, strictly negative.
    pub fn w(&self) -> Array2<f64> {
        self.w_tilde.mapv(|x| -x.exp())
    }

    /// `V = exp(Ṽ)`, strictly positive.
    pub fn v(&self) -> Array2<f64> {
        self.v_tilde.mapv(f64::exp)
    }

    fn check_positive(v: ArrayView2<f64>) -> Result<()> {
        if let Some(bad) = v.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::domain(format!(
                "gamma RBM visibles must be strictly positive and finite, got {bad}"
            )));
        }
        Ok(())
    }

    /// Hidden logits `(e−1)(c + Wᵀv) + d + Vᵀ log v` for a batch.
    fn hidden_logits(&self, v: ArrayView2<f64>) -> Array2<f64> {
        let linear = v.dot(&self.w()) + &self.c;
        let logv = v.mapv(f64::ln);
        linear * (E - 1.0) + logv.dot(&self.v()) + &self.d
    }

    /// Shape `H Vᵀ + ε` and rate `exp(H) (−W)ᵀ` for each row of `h`.
    pub fn visible_shape_rate(&self, h: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
        let alpha = h.dot(&self.v().t()) + self.epsilon;
        let beta = h.mapv(f64::exp).dot(&self.w_tilde.mapv(f64::exp).t());
        (alpha, beta)
    }

    /// Per-unit gamma distributions of `p(v | h)`.
    pub fn p_v_given_h(&self, h: ArrayView1<f64>) -> Result<Vec<GammaParams>> {
        check_vec(h, self.hidden_dim(), "h")?;
        let (alpha, beta) = self.visible_shape_rate(h.insert_axis(Axis(0)));
        alpha
            .iter()
            .zip(beta.iter())
            .enumerate()
            .map(|(index, (&a, &b))| {
                if !(a > 0.0) {
                    return Err(Error::DegenerateShape { index, alpha: a });
                }
                GammaParams::new(a, b)
            })
            .collect()
    }

    pub fn p_h_given_v(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.hidden_probs(v.insert_axis(Axis(0)))?.row(0).to_owned())
    }

    /// One `v ~ p(v | h)` draw per row of `h`.
    pub fn sample_visible(&self, h: ArrayView2<f64>, rng: &mut Rng) -> Result<Array2<f64>> {
        let (alpha, beta) = self.visible_shape_rate(h);
        let mut out = Array2::zeros(alpha.dim());
        for ((idx, o), (&a, &b)) in out.indexed_iter_mut().zip(alpha.iter().zip(beta.iter())) {
            if !(a > 0.0) {
                return Err(Error::DegenerateShape { index: idx.1, alpha: a });
            }
            *o = gamma_sample(rng, GammaParams::new(a, b)?);
        }
        Ok(out)
    }

    /// Batch sums of the sufficient statistics `v E[exp h]ᵀ`, `log v E[h]ᵀ`,
    /// `E[exp h]` and `E[h]`, given hidden probabilities `p`.
    fn suff_stats(v: ArrayView2<f64>, p: &Array2<f64>) -> GammaGrads {
        // E[exp(h_j)] = 1 + (e − 1) p_j for a Bernoulli h_j
        let exp_h = p.mapv(|q| 1.0 + (E - 1.0) * q);
        let logv = v.mapv(f64::ln);
        GammaGrads {
            w_tilde: v.t().dot(&exp_h),
            v_tilde: logv.t().dot(p),
            c: exp_h.sum_axis(Axis(0)),
            d: p.sum_axis(Axis(0)),
        }
    }

    /// CD with `k` Gibbs sweeps; `k = 0` leaves the chain at the data.
    pub(crate) fn cd_chain(&self, v: ArrayView2<f64>, rng: &mut Rng, k: usize) -> Result<GammaGrads> {
        self.validate_visible(v)?;
        let n = v.nrows() as f64;
        let p_data = self.hidden_probs(v)?;
        let data = Self::suff_stats(v, &p_data);

        let mut chain = v.to_owned();
        let mut p_chain = p_data;
        for _ in 0..k {
            let h = sample_bernoulli_matrix(&p_chain, rng);
            chain = self.sample_visible(h.view(), rng)?;
            p_chain = self.hidden_probs(chain.view())?;
        }
        let recon = Self::suff_stats(chain.view(), &p_chain);

        Ok(GammaGrads {
            w_tilde: self.w() * (data.w_tilde - recon.w_tilde) / n,
            v_tilde: self.v() * (data.v_tilde - recon.v_tilde) / n,
            c: (data.c - recon.c) / n,
            d: (data.d - recon.d) / n,
        })
    }

    /// Per-hidden-state `(log Z_h, α(h), β(h))` where `Z_h` is the visible
    /// integral times the hidden bias factor.
    fn check_integrable(&self) -> Result<()> {
        check_enumerable(self.hidden_dim())?;
        if !(self.epsilon > 0.0) {
            return Err(Error::Enumeration(
                "ε = 0 makes the partition function diverge at h = 0".into(),
            ));
        }
        Ok(())
    }

    /// Gamma shape and rate of `v | h` for hidden state number `code`.
    fn state_shape_rate(&self, code: u64) -> (Array1<f64>, Array1<f64>) {
        let h = hidden_state(code, self.hidden_dim());
        let alpha = self.v().dot(&h) + self.epsilon;
        let beta = self.w_tilde.mapv(f64::exp).dot(&h.mapv(f64::exp));
        (alpha, beta)
    }

    /// Calls `visit(code, w)` for every hidden state, where
    /// `w = cᵀe^h + dᵀh + Σ_i lnΓ(α_i) − α_i ln β_i` is the log of the state's
    /// unnormalized marginal mass.
    fn walk_hidden(&self, mut visit: impl FnMut(u64, f64)) -> Result<()> {
        self.check_integrable()?;
        let j = self.hidden_dim();
        let neg_w = self.w_tilde.mapv(f64::exp);
        let mut alpha = GrayAffine::new(Array1::from_elem(self.visible_dim(), self.epsilon), self.v().view());
        let mut beta = GrayAffine::new(neg_w.sum_axis(Axis(1)), (&neg_w * (E - 1.0)).view());
        let lin_cols = (&self.c * (E - 1.0) + &self.d).insert_axis(Axis(0));
        let mut lin = GrayAffine::new(Array1::from_elem(1, self.c.sum()), lin_cols.view());
        gray_walk(j, |code, flipped| {
            let a = alpha.update(code, flipped);
            let b = beta.update(code, flipped);
            let mut w = lin.update(code, flipped)[0];
            for (&ai, &bi) in a.iter().zip(b.iter()) {
                w += log_gamma_fn(ai)? - ai * bi.ln();
            }
            visit(code, w);
            Ok(())
        })
    }

    /// Exact `log Z` by enumerating `h` and integrating `v` in closed form.
    pub fn log_partition(&self) -> Result<f64> {
        let mut acc = LogSumExp::new();
        self.walk_hidden(|_, w| acc.add(w))?;
        Ok(acc.value())
    }

    /// `log Σ_h exp(−E(v, h))` per row, factorized over hidden units.
    pub fn log_unnormalized_marginal(&self, v: ArrayView2<f64>) -> Result<Array1<f64>> {
        self.validate_visible(v)?;
        let a = v.dot(&self.w()) + &self.c;
        let logv = v.mapv(f64::ln);
        let b = logv.dot(&self.v()) + &self.d;
        let base = logv.sum_axis(Axis(1)) * (self.epsilon - 1.0);
        let mut out = base;
        for (n, o) in out.iter_mut().enumerate() {
            for j in 0..self.hidden_dim() {
                let (aj, bj) = (a[[n, j]], b[[n, j]]);
                *o += log_sum_exp([aj, E * aj + bj]);
            }
        }
        Ok(out)
    }

    /// Ancestral sampling from the joint: `h` from its exact marginal, then
    /// `v | h`. Only available where the partition function is enumerable.
    pub fn sample_exact(&self, n: usize, rng: &mut Rng) -> Result<Array2<f64>> {
        let mut states = Vec::with_capacity(1 << self.hidden_dim());
        self.walk_hidden(|code, w| states.push((code, w)))?;
        let log_z = log_sum_exp(states.iter().map(|s| s.1));
        let mut cdf = Vec::with_capacity(states.len());
        let mut acc = 0.0;
        for s in &states {
            acc += (s.1 - log_z).exp();
            cdf.push(acc);
        }
        let mut out = Array2::zeros((n, self.visible_dim()));
        for mut row in out.rows_mut() {
            let u = rng.uniform() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(states.len() - 1);
            let (alpha, beta) = self.state_shape_rate(states[idx].0);
            for (o, (&a, &b)) in row.iter_mut().zip(alpha.iter().zip(beta.iter())) {
                *o = gamma_sample(rng, GammaParams::new(a, b)?);
            }
        }
        Ok(out)
    }
}

impl ParamSet for GammaRbmParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w_tilde.as_slice().expect("standard layout"),
            self.v_tilde.as_slice().expect("standard layout"),
            self.c.as_slice().expect("contiguous"),
            self.d.as_slice().expect("contiguous"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_tilde.as_slice_mut().expect("standard layout"),
            self.v_tilde.as_slice_mut().expect("standard layout"),
            self.c.as_slice_mut().expect("contiguous"),
            self.d.as_slice_mut().expect("contiguous"),
        ]
    }
}

impl ParamSet for GammaGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w_tilde.as_slice().expect("standard layout"),
            self.v_tilde.as_slice().expect("standard layout"),
            self.c.as_slice().expect("contiguous"),
            self.d.as_slice().expect("contiguous"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_tilde.as_slice_mut().expect("standard layout"),
            self.v_tilde.as_slice_mut().expect("standard layout"),
            self.c.as_slice_mut().expect("contiguous"),
            self.d.as_slice_mut().expect("contiguous"),
        ]
    }
}

impl Rbm for GammaRbmParams {
    type Grads = GammaGrads;

    fn kind(&self) -> ModelKind {
        ModelKind::Gamma
    }

    fn visible_dim(&self) -> usize {
        self.w_tilde.nrows()
    }

    fn hidden_dim(&self) -> usize {
        self.w_tilde.ncols()
    }

    fn validate_visible(&self, v: ArrayView2<f64>) -> Result<()> {
        check_batch(v, self.visible_dim())?;
        Self::check_positive(v)
    }

    fn energy(&self, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<f64> {
        check_vec(v, self.visible_dim(), "v")?;
        check_vec(h, self.hidden_dim(), "h")?;
        Self::check_positive(v.insert_axis(Axis(0)))?;
        let exp_h = h.mapv(f64::exp);
        let logv = v.mapv(f64::ln);
        let shape_term = self.v().dot(&h) - (1.0 - self.epsilon);
        Ok(-v.dot(&self.w().dot(&exp_h)) - self.c.dot(&exp_h) - logv.dot(&shape_term) - self.d.dot(&h))
    }

    fn hidden_probs(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.validate_visible(v)?;
        Ok(self.hidden_logits(v).mapv(sigmoid_scalar))
    }

    fn neg_energy_grad(&self, v: ArrayView1<f64>, h: ArrayView1<f64>) -> Result<GammaGrads> {
        check_vec(v, self.visible_dim(), "v")?;
        check_vec(h, self.hidden_dim(), "h")?;
        Self::check_positive(v.insert_axis(Axis(0)))?;
        let col = |x: Array1<f64>| x.insert_axis(Axis(1));
        let row = |x: Array1<f64>| x.insert_axis(Axis(0));
        let exp_h = h.mapv(f64::exp);
        let outer_w = col(v.to_owned()).dot(&row(exp_h.clone()));
        let outer_v = col(v.mapv(f64::ln)).dot(&row(h.to_owned()));
        Ok(GammaGrads {
            w_tilde: standard(self.w() * outer_w),
            v_tilde: standard(self.v() * outer_v),
            c: exp_h,
            d: h.to_owned(),
        })
    }

    fn cd_gradients(&self, v: ArrayView2<f64>, rng: &mut Rng, k: usize) -> Result<GammaGrads> {
        if k == 0 {
            return Err(Error::Config("CD needs at least one Gibbs sweep".into()));
        }
        self.cd_chain(v, rng, k)
    }

    /// `(V ĥ + ε) / (−W exp(ĥ))` with `ĥ = p(h = 1 | v)`: the gamma mean at
    /// the mean-field hidden state.
    fn reconstruct(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        let p = self.hidden_probs(v)?;
        let (alpha, beta) = self.visible_shape_rate(p.view());
        Ok(alpha / beta)
    }

    fn exact_log_likelihood(&self, v: ArrayView2<f64>) -> Result<f64> {
        let log_z = self.log_partition()?;
        let marg = self.log_unnormalized_marginal(v)?;
        Ok(marg.mean().expect("validated nonempty") - log_z)
    }

    /// Needs `J ≤ 20` and `ε > 0`; at `ε = 0` the `h = 0` term of the
    /// partition function diverges.
    fn supports_exact_likelihood(&self) -> bool {
        self.hidden_dim() <= super::MAX_EXACT_HIDDEN && self.epsilon > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn unit_model(epsilon: f64) -> GammaRbmParams {
        GammaRbmParams::new(array![[0.0]], array![[0.0]], array![0.0], array![0.0], epsilon).unwrap()
    }

    fn random_model(i: usize, j: usize, epsilon: f64, rng: &mut Rng) -> GammaRbmParams {
        let mut u = |scale: f64| scale * (2.0 * rng.uniform() - 1.0);
        let w = Array2::from_shape_simple_fn((i, j), || u(1.0));
        let vt = Array2::from_shape_simple_fn((i, j), || u(1.0));
        let c = Array1::from_shape_simple_fn(j, || u(1.0));
        let d = Array1::from_shape_simple_fn(j, || u(1.0));
        GammaRbmParams::new(w, vt, c, d, epsilon).unwrap()
    }

    #[test]
    fn energy_unit_examples() {
        let m = unit_model(0.0);
        assert!((m.energy(array![1.0].view(), array![0.0].view()).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.energy(array![1.0].view(), array![1.0].view()).unwrap() - E).abs() < 1e-15);
        assert!(matches!(
            m.energy(array![0.0].view(), array![0.0].view()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            m.energy(array![-1.0].view(), array![0.0].view()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hidden_probability_unit_example() {
        let p = unit_model(0.0).p_h_given_v(array![1.0].view()).unwrap();
        // σ(−(e − 1)) from a 40-digit evaluation
        assert!((p[0] - 0.152_092_607_399_480_76).abs() < 1e-15);
    }

    #[test]
    fn large_d_saturates() {
        let mut m = unit_model(0.0);
        m.d_mut()[0] = 800.0;
        assert_eq!(m.p_h_given_v(array![1.0].view()).unwrap()[0], 1.0);
    }

    #[test]
    fn visible_conditional_examples() {
        let m = unit_model(0.0);
        let g = m.p_v_given_h(array![1.0].view()).unwrap();
        assert!((g[0].alpha() - 1.0).abs() < 1e-15);
        assert!((g[0].beta() - E).abs() < 1e-15);
        assert!((g[0].mean() - 0.367_879_441_171_442_33).abs() < 1e-15);

        let m = unit_model(0.01);
        let g = m.p_v_given_h(array![0.0].view()).unwrap();
        assert!((g[0].alpha() - 0.01).abs() < 1e-15);
        assert!((g[0].beta() - 1.0).abs() < 1e-15);

        let m = unit_model(0.0);
        assert!(matches!(
            m.p_v_given_h(array![0.0].view()),
            Err(Error::DegenerateShape { index: 0, .. })
        ));
    }

    #[test]
    fn rate_is_positive_for_extreme_parameters() {
        let m = GammaRbmParams::new(
            array![[-700.0, 5.0], [30.0, -30.0]],
            array![[0.0, 1.0], [2.0, -3.0]],
            array![0.0, 0.0],
            array![0.0, 0.0],
            0.1,
        )
        .unwrap();
        for h in [array![0.0, 0.0], array![1.0, 0.0], array![0.3, 1.0]] {
            for g in m.p_v_given_h(h.view()).unwrap() {
                assert!(g.beta() > 0.0);
            }
        }
    }

    #[test]
    fn partition_unit_example() {
        let m = unit_model(1.0);
        let z = m.log_partition().unwrap().exp();
        assert!((z - (1.0 + (-2.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn partition_refusals() {
        assert!(matches!(unit_model(0.0).log_partition(), Err(Error::Enumeration(_))));
        let mut rng = Rng::new(0, 0);
        let big = GammaRbmParams::init(2, 21, 0.1, &mut rng).unwrap();
        assert!(matches!(big.log_partition(), Err(Error::Enumeration(_))));
    }

    #[test]
    fn partition_tracks_bias_shift() {
        let mut rng = Rng::new(5, 0);
        let m = random_model(3, 4, 0.2, &mut rng);
        let base = m.log_partition().unwrap();
        let mut shifted = m.clone();
        shifted.d_mut()[2] += 0.7;
        // Recompute by brute force: every state with h_2 = 1 gains e^{0.7}.
        let mut terms = Vec::new();
        m.walk_hidden(|code, w| terms.push(w + if (code >> 2) & 1 == 1 { 0.7 } else { 0.0 }))
            .unwrap();
        assert_eq!(terms.len(), 16);
        let manual = log_sum_exp(terms);
        assert!((shifted.log_partition().unwrap() - manual).abs() < 1e-12);
        assert!(shifted.log_partition().unwrap() > base);
    }

    #[test]
    fn gray_walk_matches_direct_state_weights() {
        let mut rng = Rng::new(12, 0);
        let m = random_model(4, 10, 0.1, &mut rng);
        let mut seen = vec![false; 1 << 10];
        m.walk_hidden(|code, w| {
            let (alpha, beta) = m.state_shape_rate(code);
            let h = hidden_state(code, 10);
            let mut direct = m.c.dot(&h.mapv(f64::exp)) + m.d.dot(&h);
            for (&a, &b) in alpha.iter().zip(beta.iter()) {
                direct += log_gamma_fn(a).unwrap() - a * b.ln();
            }
            assert!((w - direct).abs() < 1e-10 * direct.abs().max(1.0), "code {code}");
            seen[code as usize] = true;
        })
        .unwrap();
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn factorized_marginal_matches_enumeration() {
        let mut rng = Rng::new(9, 0);
        let m = random_model(3, 4, 0.05, &mut rng);
        let v = array![[0.4, 1.3, 2.2], [0.05, 0.9, 3.5]];
        let fast = m.log_unnormalized_marginal(v.view()).unwrap();
        for (n, row) in v.rows().into_iter().enumerate() {
            let brute = log_sum_exp((0..16u64).map(|code| -m.energy(row, hidden_state(code, 4).view()).unwrap()));
            assert!((fast[n] - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn cd_with_chain_at_data_is_zero() {
        let mut rng = Rng::new(1, 0);
        let m = random_model(4, 3, 0.01, &mut rng);
        let v = array![[0.5, 1.0, 2.0, 0.1], [1.5, 0.2, 0.7, 3.0]];
        let g = m.cd_chain(v.view(), &mut rng, 0).unwrap();
        assert!(g.tensors().iter().all(|t| t.iter().all(|&x| x == 0.0)));
        assert!(m.cd_gradients(v.view(), &mut rng, 0).is_err());
    }

    #[test]
    fn cd_single_point_data_side() {
        // With the chain frozen at the data, the data half of the CD
        // estimate is exactly the mean-field statistic; check it by hand.
        let p = sigmoid_scalar(-(E - 1.0));
        let stats = GammaRbmParams::suff_stats(array![[1.0]].view(), &array![[p]]);
        let e_exp_h = 1.0 + (E - 1.0) * p;
        assert!((stats.w_tilde[[0, 0]] - e_exp_h).abs() < 1e-15);
        assert_eq!(stats.v_tilde[[0, 0]], 0.0);
        assert!((stats.c[0] - e_exp_h).abs() < 1e-15);
        assert!((stats.d[0] - p).abs() < 1e-15);
    }

    #[test]
    fn cd_is_deterministic_and_finite() {
        let mut rng = Rng::new(2, 0);
        let m = random_model(5, 3, 1e-4, &mut rng);
        let v = Array2::from_shape_fn((8, 5), |(n, i)| 0.1 + (n * 5 + i) as f64 * 0.07);
        let a = m.cd_gradients(v.view(), &mut Rng::new(3, 1), 2).unwrap();
        let b = m.cd_gradients(v.view(), &mut Rng::new(3, 1), 2).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite());
    }

    #[test]
    fn reconstruct_unit_example() {
        let r = unit_model(0.0).reconstruct(array![[1.0]].view()).unwrap();
        // ĥ / exp(ĥ) at ĥ = σ(−(e − 1)), from a 40-digit evaluation
        assert!((r[[0, 0]] - 0.130_633_669_138_948_08).abs() < 1e-15);
    }

    #[test]
    fn exact_sampler_matches_conditional_moments() {
        // J = 1 with d very negative: h = 0 almost surely, v ~ Gamma(ε + 0, e^{W̃}).
        let m = GammaRbmParams::new(array![[0.5]], array![[0.0]], array![0.0], array![-60.0], 2.0).unwrap();
        let mut rng = Rng::new(4, 0);
        let s = m.sample_exact(200_000, &mut rng).unwrap();
        let mean = s.mean().unwrap();
        assert!((mean - 2.0 / 0.5f64.exp()).abs() < 0.01);
    }

    #[test]
    fn constructor_validation() {
        let ok = || (array![[0.0]], array![[0.0]], array![0.0], array![0.0]);
        let (w, v, c, d) = ok();
        assert!(GammaRbmParams::new(w, v, c, d, -0.1).is_err());
        let (w, _, c, d) = ok();
        assert!(GammaRbmParams::new(w, array![[0.0, 1.0]], c, d, 0.0).is_err());
        let (_, v, c, d) = ok();
        assert!(GammaRbmParams::new(array![[f64::NAN]], v, c, d, 0.0).is_err());
    }
}
