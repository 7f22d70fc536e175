//! Coordinate-basis Levi-Civita data computed straight from `∂g`.
//!
//! This path does not touch frame brackets and serves as an independent
//! oracle for the frame pipeline in the parent module.

use crate::error::Result;
use crate::jet::RJet;
use crate::linalg::{self, JetMat};

use super::{metric_pair, PointGeometry};

/// `gamma[a][b][c] = Γ^a_{bc}`
pub type Christoffel = Vec<Vec<Vec<RJet>>>;

pub fn christoffel(g: &JetMat<f64>) -> Result<Christoffel> {
    let n = g.len();
    let ginv = linalg::inverse(g)?;
    // dg[d][a][b] = ∂_d g_ab
    let dg: Vec<Vec<Vec<RJet>>> = (0..n)
        .map(|d| (0..n).map(|a| (0..n).map(|b| g[a][b].deriv(d)).collect()).collect())
        .collect();
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let mut ga = Vec::with_capacity(n);
        for b in 0..n {
            let mut gb = Vec::with_capacity(n);
            for c in 0..n {
                let mut acc = dg[0][0][0].zero_like();
                for d in 0..n {
                    let t = &(&dg[b][d][c] + &dg[c][d][b]) - &dg[d][b][c];
                    acc += &(&ginv[a][d] * &t);
                }
                gb.push(acc.scale(0.5));
            }
            ga.push(gb);
        }
        out.push(ga);
    }
    Ok(out)
}

/// `R^a_{bcd}` with `R(∂_c, ∂_d)∂_b = R^a_{bcd} ∂_a`.
pub fn riemann(gam: &Christoffel) -> Vec<Vec<Vec<Vec<RJet>>>> {
    let n = gam.len();
    let z = gam[0][0][0].deriv(0).zero_like();
    let mut out = vec![vec![vec![vec![z.clone(); n]; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = &gam[a][d][b].deriv(c) - &gam[a][c][b].deriv(d);
                    for e in 0..n {
                        acc += &(&gam[a][c][e] * &gam[e][d][b]);
                        acc -= &(&gam[a][d][e] * &gam[e][c][b]);
                    }
                    out[a][b][c][d] = acc;
                }
            }
        }
    }
    out
}

/// Coordinate Ricci tensor `R_bd = R^a_{bad}`.
pub fn ricci(g: &JetMat<f64>) -> Result<JetMat<f64>> {
    let gam = christoffel(g)?;
    let r = riemann(&gam);
    let n = g.len();
    Ok((0..n)
        .map(|b| {
            (0..n)
                .map(|d| {
                    let mut acc = r[0][b][0][d].clone();
                    for a in 1..n {
                        acc += &r[a][b][a][d];
                    }
                    acc
                })
                .collect()
        })
        .collect())
}

/// Oracle values at a point: frame connection, frame Ricci, scalar curvature.
pub struct OracleData {
    pub omega: Vec<Vec<Vec<f64>>>,
    pub ric: Vec<Vec<f64>>,
    pub scal: f64,
}

pub fn oracle(geo: &PointGeometry) -> Result<OracleData> {
    let n = geo.n();
    let gam = christoffel(&geo.g)?;
    let mut omega = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            // ∇_{E_i} E_j in coordinates
            let v: Vec<RJet> = (0..n)
                .map(|c| {
                    let mut acc = geo.e[i][0].zero_like();
                    for a in 0..n {
                        let mut inner = geo.e[j][c].deriv(a);
                        for b in 0..n {
                            inner += &(&gam[c][a][b] * &geo.e[j][b]);
                        }
                        acc += &(&geo.e[i][a] * &inner);
                    }
                    acc
                })
                .collect();
            for k in 0..n {
                omega[i][j][k] = metric_pair(&geo.g, &v, &geo.e[k]).value();
            }
        }
    }
    let rc = ricci(&geo.g)?;
    let ric = geo
        .to_frame(&rc)
        .iter()
        .map(|r| r.iter().map(|x| x.value()).collect())
        .collect();
    let ginv = linalg::inverse(&geo.g)?;
    let mut scal = 0.0;
    for b in 0..n {
        for d in 0..n {
            scal += ginv[b][d].value() * rc[b][d].value();
        }
    }
    Ok(OracleData { omega, ric, scal })
}
