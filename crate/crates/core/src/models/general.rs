//! Unrestricted Boltzmann energies. Only evaluation is provided; they serve
//! as block-structure oracles for the restricted models.

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{check_vec, GammaRbmParams, Rbm};
use crate::error::{Error, Result};

fn check_square(m: ArrayView2<f64>, n: usize, name: &str) -> Result<()> {
    if m.dim() != (n, n) {
        return Err(Error::shape(format!("{name} is {:?}, expected ({n}, {n})", m.dim())));
    }
    Ok(())
}

/// `−½ xᵀUx − uᵀx`.
pub fn general_energy(x: ArrayView1<f64>, u_mat: ArrayView2<f64>, u_vec: ArrayView1<f64>) -> Result<f64> {
    let n = x.len();
    check_square(u_mat, n, "U")?;
    check_vec(u_vec, n, "u")?;
    Ok(-0.5 * x.dot(&u_mat.dot(&x)) - u_vec.dot(&x))
}

/// `−½ xᵀUx − uᵀx − ½ log(x)ᵀ S log(x) − sᵀ log(x)` for strictly positive `x`.
pub fn general_gamma_energy(
    x: ArrayView1<f64>,
    u_mat: ArrayView2<f64>,
    u_vec: ArrayView1<f64>,
    s_mat: ArrayView2<f64>,
    s_vec: ArrayView1<f64>,
) -> Result<f64> {
    if let Some(bad) = x.iter().find(|&&xi| !(xi > 0.0)) {
        return Err(Error::domain(format!(
            "gamma Boltzmann state must be positive, got {bad}"
        )));
    }
    let n = x.len();
    check_square(s_mat, n, "S")?;
    check_vec(s_vec, n, "s")?;
    let lx = x.mapv(f64::ln);
    Ok(general_energy(x, u_mat, u_vec)? - 0.5 * lx.dot(&s_mat.dot(&lx)) - s_vec.dot(&lx))
}

/// Block parameters of the unrestricted gamma machine equivalent to a
/// gamma-Bernoulli RBM.
#[derive(Debug, Clone)]
pub struct GammaBlocks {
    pub u_mat: Array2<f64>,
    pub u_vec: Array1<f64>,
    pub s_mat: Array2<f64>,
    pub s_vec: Array1<f64>,
}

impl GammaBlocks {
    /// `U = [[O, W], [Wᵀ, O]]`, `u = [0; c]`, `S = [[O, V], [Vᵀ, O]]`,
    /// `s = [(ε − 1)·1; d]`.
    pub fn from_rbm(p: &GammaRbmParams) -> Self {
        let (i, j) = (p.visible_dim(), p.hidden_dim());
        let n = i + j;
        let off_diag = |m: &Array2<f64>| {
            let mut full = Array2::zeros((n, n));
            full.slice_mut(s![..i, i..]).assign(m);
            full.slice_mut(s![i.., ..i]).assign(&m.t());
            full
        };
        let u_vec = concatenate(Axis(0), &[Array1::zeros(i).view(), p.c().view()]).expect("1-d concat");
        let s_vec =
            concatenate(Axis(0), &[Array1::from_elem(i, p.epsilon() - 1.0).view(), p.d().view()]).expect("1-d concat");
        Self {
            u_mat: off_diag(&p.w()),
            u_vec,
            s_mat: off_diag(&p.v()),
            s_vec,
        }
    }

    /// Joint state `x = [v; exp(h)]`.
    pub fn joint_state(v: ArrayView1<f64>, h: ArrayView1<f64>) -> Array1<f64> {
        concatenate(Axis(0), &[v, h.mapv(f64::exp).view()]).expect("1-d concat")
    }

    pub fn energy(&self, x: ArrayView1<f64>) -> Result<f64> {
        general_gamma_energy(
            x,
            self.u_mat.view(),
            self.u_vec.view(),
            self.s_mat.view(),
            self.s_vec.view(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_parameters_give_zero_energy() {
        let x = array![0.3, 2.0, 5.0];
        let z = Array2::zeros((3, 3));
        let zv = Array1::zeros(3);
        assert_eq!(
            general_gamma_energy(x.view(), z.view(), zv.view(), z.view(), zv.view()).unwrap(),
            0.0
        );
    }

    #[test]
    fn ones_state_drops_log_terms() {
        let x = Array1::ones(2);
        let u = array![[1.0, 2.0], [2.0, -3.0]];
        let uv = array![0.5, -1.5];
        let s = array![[4.0, 1.0], [1.0, 7.0]];
        let sv = array![3.0, 9.0];
        let e = general_gamma_energy(x.view(), u.view(), uv.view(), s.view(), sv.view()).unwrap();
        // −½·1ᵀU1 − uᵀ1 = −½·2 + 1
        assert!((e - 0.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_state() {
        let x = array![1.0, 0.0];
        let z = Array2::zeros((2, 2));
        let zv = Array1::zeros(2);
        assert!(matches!(
            general_gamma_energy(x.view(), z.view(), zv.view(), z.view(), zv.view()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn shape_checks() {
        let x = array![1.0, 2.0];
        let z = Array2::zeros((3, 3));
        let zv = Array1::zeros(2);
        assert!(matches!(
            general_energy(x.view(), z.view(), zv.view()),
            Err(Error::Shape(_))
        ));
    }
}
