//! Frame-component tensor calculus: covariant derivatives of symmetric
//! 2-tensors, the σ-weighted divergence, the tensor pairing and scalar
//! operators. Covectors are stored as `α(E_i)`, vectors as `X^i` with
//! `X = Σ X^i E_i`.

use crate::jet::RJet;
use crate::linalg::JetMat;

use super::PointGeometry;

/// `(∇_{E_i} T)(E_j, E_k)` for frame components `T`.
pub fn cov_sym(geo: &PointGeometry, t: &JetMat<f64>, i: usize) -> JetMat<f64> {
    let n = geo.n();
    let om = &geo.omega;
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let mut acc = geo.dir(i, &t[j][k]);
                    for m in 0..n {
                        let s = &(&om[i][j][m] * &t[m][k]) + &(&om[i][k][m] * &t[j][m]);
                        acc -= &s.scale(geo.chi[m]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `div(T)(E_x) = σ Σ_i χ(i) (∇_{E_i} T)(E_i, E_x)`
pub fn div_sym(geo: &PointGeometry, t: &JetMat<f64>, sigma: f64) -> Vec<RJet> {
    let n = geo.n();
    let covs: Vec<JetMat<f64>> = (0..n).map(|i| cov_sym(geo, t, i)).collect();
    (0..n)
        .map(|x| {
            let mut acc = covs[0][0][x].scale(geo.chi[0]);
            for (i, c) in covs.iter().enumerate().skip(1) {
                acc += &c[i][x].scale(geo.chi[i]);
            }
            acc.scale(sigma)
        })
        .collect()
}

/// `((T, h)) = Σ χ(i) χ(j) T_ij h_ij`
pub fn pair(chi: &[f64], t: &JetMat<f64>, h: &JetMat<f64>) -> RJet {
    let n = chi.len();
    let mut acc = t[0][0].zero_like();
    for i in 0..n {
        for j in 0..n {
            acc += &(&t[i][j] * &h[i][j]).scale(chi[i] * chi[j]);
        }
    }
    acc
}

/// Frame components of `f·η`.
pub fn scalar_times_metric(chi: &[f64], f: &RJet) -> JetMat<f64> {
    let n = chi.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { f.scale(chi[i]) } else { f.zero_like() })
                .collect()
        })
        .collect()
}

/// Derived data of a scalar function at a point.
#[derive(Clone, Debug)]
pub struct ScalarData {
    pub f: RJet,
    /// `df(E_i)`
    pub df: Vec<RJet>,
    /// frame components of `grad f`: `χ(i) df(E_i)`
    pub grad: Vec<RJet>,
    /// `|df|^2 = η(grad f, grad f)`
    pub norm2: RJet,
    /// `Hess f(E_i, E_j)`
    pub hess: JetMat<f64>,
    /// `Δf = -div grad f`
    pub lap: RJet,
}

impl ScalarData {
    pub fn new(geo: &PointGeometry, f: &RJet) -> Self {
        let n = geo.n();
        let df: Vec<RJet> = (0..n).map(|i| geo.dir(i, f)).collect();
        let grad: Vec<RJet> = df.iter().zip(&geo.chi).map(|(d, &c)| d.scale(c)).collect();
        let mut norm2 = df[0].zero_like();
        for i in 0..n {
            norm2 += &(&df[i] * &df[i]).scale(geo.chi[i]);
        }
        let hess: JetMat<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = geo.dir(i, &df[j]);
                        for k in 0..n {
                            acc -= &(&geo.omega[i][j][k] * &df[k]).scale(geo.chi[k]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let mut lap = hess[0][0].scale(-geo.chi[0]);
        for i in 1..n {
            lap -= &hess[i][i].scale(geo.chi[i]);
        }
        ScalarData {
            f: f.clone(),
            df,
            grad,
            norm2,
            hess,
            lap,
        }
    }
}
