//! Metric deformations `η_t(X, Y) = η(X, e^{tH} Y)` with `η(X, HY) = h(X, Y)`,
//! and finite-difference checks of the variation formulas.
//!
//! Spinors on `η_t` are compared with spinors on `η` through matched
//! frames `E_i ↦ K_t^{-1} E_i`, `K_t = e^{tH/2}`: the spinor isomorphism is
//! the identity on frame components. A field given by its component
//! function is therefore the same closure on every member of the family.
//!
//! Derivatives in `t` are central differences with one Richardson level,
//! `(4 D(δ) - D(2δ)) / 3`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clifford::{spinor_scale, spinor_values, CliffordModel, C64};
use crate::equations::{residual_cled, residual_ed2, CharFn, Check, CledParams, EdParams, Kind, Outcome, Setting};
use crate::error::{Error, Result};
use crate::geometry::{coordinate, cov_sym, div_sym, gram_schmidt, metric_pair, pair, Chart, PointGeometry, TensorFn};
use crate::jet::RJet;
use crate::linalg::{self, JetMat};
use crate::spincalc::{affine_field, power_field, SpinCalc, SpinorFn};

/// Finite-difference step for `t`-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fd {
    pub step: f64,
}

impl Default for Fd {
    fn default() -> Self {
        Fd { step: 1e-3 }
    }
}

impl Fd {
    fn stencil(&self) -> [f64; 4] {
        let d = self.step;
        [-2.0 * d, -d, d, 2.0 * d]
    }

    /// Richardson-extrapolated central difference from values at the
    /// stencil `[-2δ, -δ, δ, 2δ]`.
    fn combine(&self, v: &[Vec<f64>; 4]) -> Vec<f64> {
        let d = self.step;
        (0..v[0].len())
            .map(|k| {
                let d1 = (v[2][k] - v[1][k]) / (2.0 * d);
                let d2 = (v[3][k] - v[0][k]) / (4.0 * d);
                (4.0 * d1 - d2) / 3.0
            })
            .collect()
    }

    pub fn derivative(&self, f: impl Fn(f64) -> Result<Vec<f64>> + Sync) -> Result<Vec<f64>> {
        let s = self.stencil();
        let vals: Vec<Vec<f64>> = s.par_iter().map(|&t| f(t)).collect::<Result<_>>()?;
        let arr: [Vec<f64>; 4] = vals.try_into().expect("four stencil values");
        Ok(self.combine(&arr))
    }

    pub fn scalar_derivative(&self, f: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
        Ok(self.derivative(|t| Ok(vec![f(t)?]))?[0])
    }
}

/// Random trigonometric symmetric 2-tensor in coordinate components.
pub fn random_deformation(n: usize, seed: u64, amp: f64) -> TensorFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // per component: constant + cos/sin along a few integer modes
    let modes: Vec<Vec<i32>> = (0..3)
        .map(|_| (0..n).map(|_| rng.gen_range(-1..=1)).collect())
        .collect();
    let mut coef = vec![vec![Vec::new(); n]; n];
    for a in 0..n {
        for b in a..n {
            let c: Vec<f64> = (0..1 + 2 * modes.len())
                .map(|_| rng.gen_range(-1.0..1.0) * amp)
                .collect();
            coef[a][b] = c.clone();
            coef[b][a] = c;
        }
    }
    Arc::new(move |x: &[RJet]| {
        let thetas: Vec<RJet> = modes
            .iter()
            .map(|m| {
                let mut th = x[0].zero_like();
                for (xi, &mi) in x.iter().zip(m) {
                    th += &xi.scale(mi as f64);
                }
                th
            })
            .collect();
        let cs: Vec<(RJet, RJet)> = thetas.iter().map(|t| (t.cos(), t.sin())).collect();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let c = &coef[a][b];
                        let mut v = x[0].lift(c[0]);
                        for (k, (co, si)) in cs.iter().enumerate() {
                            v += &co.scale(c[1 + 2 * k]);
                            v += &si.scale(c[2 + 2 * k]);
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    })
}

/// `h = c·η` for the chart metric.
pub fn metric_deformation(base: &Chart, c: f64) -> TensorFn {
    let g = base.metric_fn();
    Arc::new(move |x: &[RJet]| linalg::scale(&g(x), c))
}

/// `h = 0`
pub fn zero_deformation(n: usize) -> TensorFn {
    Arc::new(move |x: &[RJet]| vec![vec![x[0].zero_like(); n]; n])
}

fn endomorphism(g: &JetMat<f64>, h: &JetMat<f64>) -> Result<JetMat<f64>> {
    Ok(linalg::matmul(&linalg::inverse(g)?, h))
}

/// The deformed chart `η_t` with the matched frame `K_t^{-1} E_i`.
pub fn family_chart(base: &Chart, h: &TensorFn, t: f64) -> Chart {
    let (g0, f0) = (base.metric_fn(), base.frame_fn());
    let (h1, h2, g1) = (h.clone(), h.clone(), g0.clone());
    let metric = Arc::new(move |x: &[RJet]| {
        let g = g1(x);
        let hh = endomorphism(&g, &h1(x)).expect("nondegenerate base metric");
        linalg::matmul(&g, &linalg::expm(&linalg::scale(&hh, t)))
    });
    let frame = Arc::new(move |x: &[RJet], _gt: &JetMat<f64>| {
        let g = g0(x);
        let e = f0(x, &g)?;
        let l = linalg::expm(&linalg::scale(&endomorphism(&g, &h2(x))?, -t / 2.0));
        Ok(e.iter().map(|row| linalg::matvec(&l, row)).collect())
    });
    Chart::new(format!("{}_t={t}", base.name), base.sig, base.domain.clone(), metric)
        .with_frame(frame)
        .periodic(base.periodic)
}

/// `Λ_t(E_j, E_k, E_l) = η(Λ_t(E_j, E_k), E_l)` at the point of `geo`,
/// from the defining formula with `P(V, W) = K{(∇_{K^{-1}V} K^{-1})(W)}`.
pub fn lambda_tensor(geo: &PointGeometry, h: &JetMat<f64>, t: f64) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = geo.n();
    let hh = endomorphism(&geo.g, h)?;
    let l = linalg::expm(&linalg::scale(&hh, -t / 2.0));
    let k = linalg::values(&linalg::expm(&linalg::scale(&hh, t / 2.0)));
    let gam = coordinate::christoffel(&geo.g)?;
    let g = linalg::values(&geo.g);
    let lv = linalg::values(&l);
    let e: Vec<Vec<f64>> = geo.e.iter().map(|r| r.iter().map(|x| x.value()).collect()).collect();
    // (∇_c L)^a_b
    let dl: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|c| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            let mut v = l[a][b].deriv(c).value();
                            for m in 0..n {
                                v += gam[a][c][m].value() * lv[m][b] - lv[a][m] * gam[m][c][b].value();
                            }
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mv =
        |m: &Vec<Vec<f64>>, v: &[f64]| -> Vec<f64> { (0..n).map(|a| (0..n).map(|b| m[a][b] * v[b]).sum()).collect() };
    let z: Vec<Vec<f64>> = e.iter().map(|ej| mv(&lv, ej)).collect();
    // p[j][k] = P(E_j, E_k) in coordinates
    let p: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|kk| {
                    let mut dlz = vec![vec![0.0; n]; n];
                    for c in 0..n {
                        for a in 0..n {
                            for b in 0..n {
                                dlz[a][b] += z[j][c] * dl[c][a][b];
                            }
                        }
                    }
                    mv(&k, &mv(&dlz, &e[kk]))
                })
                .collect()
        })
        .collect();
    let ip = |x: &[f64], y: &[f64]| -> f64 { (0..n).map(|a| (0..n).map(|b| x[a] * g[a][b] * y[b]).sum::<f64>()).sum() };
    let sub = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a - b).collect() };
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for j in 0..n {
        for kk in 0..n {
            for ll in 0..n {
                let v = ip(&e[ll], &sub(&p[j][kk], &p[kk][j]))
                    + ip(&e[kk], &sub(&p[ll][j], &p[j][ll]))
                    + ip(&e[j], &sub(&p[ll][kk], &p[kk][ll]));
                out[j][kk][ll] = 0.5 * v;
            }
        }
    }
    Ok(out)
}

fn flatten3(x: &[Vec<Vec<f64>>]) -> Vec<f64> {
    x.iter().flatten().flatten().copied().collect()
}

fn spinor_reals(s: &crate::clifford::Spinor) -> Vec<f64> {
    s.0.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Pointwise variation checks at the given points: the Dirac variation,
/// the `T_1` pairing, the three `Λ` identities, the finite-`t` relations
/// between the two Levi-Civita connections and the two Dirac operators,
/// the volume variation, and index preservation.
pub fn pointwise_variation_checks(
    base: &Chart,
    model: &CliffordModel,
    h: &TensorFn,
    psi: &SpinorFn,
    points: &[Vec<f64>],
    fd: Fd,
) -> Result<Outcome> {
    let n = base.dim();
    let ir = model.sig.i_r();
    let stencil = fd.stencil();
    let fams: Vec<Chart> = stencil.iter().map(|&t| family_chart(base, h, t)).collect();
    let t_fin = 0.05;
    let fam_fin = family_chart(base, h, t_fin);
    let rows: Vec<[f64; 11]> = points
        .par_iter()
        .map(|p| -> Result<[f64; 11]> {
            // values along the stencil: D_t ψ, (i^r D_t ψ, ψ), μ_t
            let mut dvals: Vec<Vec<f64>> = Vec::new();
            let mut pvals: Vec<Vec<f64>> = Vec::new();
            let mut vvals: Vec<Vec<f64>> = Vec::new();
            let mut index_ok = true;
            for fam in &fams {
                let geo = fam.geometry(p, 1)?;
                index_ok &= gram_schmidt(&geo.g, fam.sig).is_ok();
                let sc = SpinCalc::new(&geo, model)?;
                let ps = sc.eval(psi)?;
                let d = sc.dirac(&ps);
                dvals.push(spinor_reals(&spinor_values(&d)));
                pvals.push(vec![sc.pair(&spinor_scale(&d, ir), &ps).value()]);
                vvals.push(vec![geo.vol.value()]);
            }
            let arr = |v: Vec<Vec<f64>>| -> [Vec<f64>; 4] { v.try_into().expect("stencil") };
            let dd = fd.combine(&arr(dvals));
            let dp = fd.combine(&arr(pvals))[0];
            let dv = fd.combine(&arr(vvals))[0];

            let geo = base.geometry(p, 2)?;
            let chi = &geo.chi;
            let sc = SpinCalc::new(&geo, model)?;
            let ps = sc.eval(psi)?;
            let hc = h(&geo.x);
            let hf = geo.to_frame(&hc);
            let covs = sc.cov_all(&ps);
            // -½ Σ_j χ(j) h(E_j)·∇_j ψ - ¼ div(h)·ψ + ¼ grad(Tr h)·ψ
            let mut rhs: Vec<_> = ps.iter().map(|x| x.zero_like()).collect();
            for j in 0..n {
                let hv: Vec<RJet> = (0..n).map(|i| hf[i][j].scale(chi[i])).collect();
                let t = sc.clifford(&hv, &covs[j]);
                for (r, x) in rhs.iter_mut().zip(&t) {
                    *r -= &x.scale_real(0.5 * chi[j]);
                }
            }
            let divh = div_sym(&geo, &hf, 1.0);
            let divh_v: Vec<RJet> = divh.iter().zip(chi).map(|(d, &c)| d.scale(c)).collect();
            let mut trh = hf[0][0].scale(chi[0]);
            for i in 1..n {
                trh += &hf[i][i].scale(chi[i]);
            }
            let gtr: Vec<RJet> = (0..n).map(|i| geo.dir(i, &trh).scale(chi[i])).collect();
            let a = sc.clifford(&divh_v, &ps);
            let b = sc.clifford(&gtr, &ps);
            for ((r, x), y) in rhs.iter_mut().zip(&a).zip(&b) {
                *r -= &x.scale_real(0.25);
                *r += &y.scale_real(0.25);
            }
            let r28 = max_diff(&dd, &spinor_reals(&spinor_values(&rhs)));
            let t1 = sc.t1(&ps, 1.0);
            let r213 = (dp + 0.25 * pair(chi, &t1, &hf).value()).abs();

            // Λ identities
            let lam = fd.derivative(|t| Ok(flatten3(&lambda_tensor(&geo, &hc, t)?)))?;
            let idx = |j: usize, k: usize, l: usize| (j * n + k) * n + l;
            let ch: Vec<JetMat<f64>> = (0..n).map(|i| cov_sym(&geo, &hf, i)).collect();
            let (mut ra, mut rb, mut rc): (f64, f64, f64) = (0.0, 0.0, 0.0);
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let pb = 0.5 * ch[k][j][l].value() - 0.5 * ch[l][j][k].value();
                        rb = rb.max((lam[idx(j, k, l)] - pb).abs());
                        let pa = -0.5 * ch[j][l][k].value() + 0.5 * ch[k][l][j].value();
                        ra = ra.max((lam[idx(j, k, l)] - lam[idx(k, j, l)] - pa).abs());
                        rc = rc.max((lam[idx(j, k, l)] + lam[idx(k, l, j)] + lam[idx(l, j, k)]).abs());
                    }
                }
            }
            let lam0 = flatten3(&lambda_tensor(&geo, &hc, 0.0)?)
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));

            // finite-t relations
            let gt = fam_fin.geometry(p, 1)?;
            let lam_t = lambda_tensor(&geo, &hc, t_fin)?;
            // c[j][i] = χ(i) η(E^t_j, E_i)
            let c: Vec<Vec<f64>> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|i| chi[i] * metric_pair(&geo.g, &gt.e[j], &geo.e[i]).value())
                        .collect()
                })
                .collect();
            let mut r22: f64 = 0.0;
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = gt.omega[j][k][l].value() - lam_t[j][k][l];
                        for i in 0..n {
                            v -= c[j][i] * geo.omega[i][k][l].value();
                        }
                        r22 = r22.max(v.abs());
                    }
                }
            }
            let sct = SpinCalc::new(&gt, model)?;
            let pst = sct.eval(psi)?;
            let cov_t = sct.cov_all(&pst);
            let psv = spinor_values(&ps);
            let mut r24: f64 = 0.0;
            let mut dirac_rel = crate::clifford::Spinor::zeros(model.dim());
            for j in 0..n {
                let mut v = crate::clifford::Spinor::zeros(model.dim());
                for i in 0..n {
                    v = v.add(&spinor_values(&covs[i]).scale(C64::new(c[j][i], 0.0)));
                }
                for k in 0..n {
                    for l in 0..n {
                        if k == l {
                            continue;
                        }
                        let w = 0.25 * chi[k] * chi[l] * lam_t[j][k][l];
                        let gg = model.apply_gamma(k, &model.apply_gamma(l, &psv));
                        v = v.add(&gg.scale(C64::new(w, 0.0)));
                    }
                }
                r24 = r24.max(v.sub(&spinor_values(&cov_t[j])).max_abs());
                dirac_rel = dirac_rel.add(&model.apply_gamma(j, &v).scale(C64::new(chi[j], 0.0)));
            }
            let r25 = dirac_rel.sub(&spinor_values(&sct.dirac(&pst))).max_abs();
            let orth = gt.orthonormality_residual();

            let rvol = (dv - 0.5 * trh.value() * geo.vol.value()).abs();
            Ok([
                r28,
                r213,
                ra,
                rb,
                rc,
                lam0,
                r22,
                r24,
                r25,
                rvol,
                if index_ok { orth } else { f64::INFINITY },
            ])
        })
        .collect::<Result<_>>()?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "variation.dirac",
        "first variation of the Dirac operator",
        col(0),
        1e-6,
    ));
    out.push(Check::vanish(
        "variation.t1_pairing",
        "variation of ((√-1)^r Dψ, ψ) against T_1",
        col(1),
        1e-6,
    ));
    out.push(Check::vanish(
        "variation.lambda_antisym",
        "t-derivative of Λ(X,Y) - Λ(Y,X)",
        col(2),
        1e-7,
    ));
    out.push(Check::vanish(
        "variation.lambda",
        "t-derivative of η(Λ(X,Y),Z)",
        col(3),
        1e-7,
    ));
    out.push(Check::vanish(
        "variation.lambda_cyclic",
        "t-derivative of the cyclic 3-form Ω",
        col(4),
        1e-7,
    ));
    out.push(Check::vanish("variation.lambda_zero", "Λ_0 = 0", col(5), 1e-12));
    out.push(Check::vanish(
        "variation.connection_relation",
        "Levi-Civita connections of η_t and η related by Λ",
        col(6),
        1e-9,
    ));
    out.push(Check::vanish(
        "variation.spinor_relation",
        "spinor derivatives of η_t and η related by Λ",
        col(7),
        1e-9,
    ));
    out.push(Check::vanish(
        "variation.dirac_relation",
        "Dirac operators of η_t and η related by Λ",
        col(8),
        1e-9,
    ));
    out.push(Check::vanish(
        "variation.volume",
        "variation of the volume form",
        col(9),
        1e-6,
    ));
    out.push(Check::vanish(
        "variation.matched_frame",
        "matched frame is η_t-orthonormal and the index is preserved",
        col(10),
        1e-12,
    ));
    Ok(out)
}

/// Trapezoidal quadrature of a pointwise quantity over the chart box.
pub fn integrate(
    chart: &Chart,
    m: usize,
    order: usize,
    f: impl Fn(&PointGeometry) -> Result<f64> + Sync,
) -> Result<f64> {
    if !chart.periodic {
        return Err(Error::Config(format!(
            "quadrature needs a closed chart, {} is not periodic",
            chart.name
        )));
    }
    let (pts, cell) = chart.grid(m);
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|p| f(&chart.geometry(p, order)?))
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() * cell)
}

/// Integrated variation identities on a closed chart: the `T_2` identity
/// and the scalar-curvature identity, both against the fixed volume
/// `μ_η`. Each integral is also computed on the half grid; if the two
/// differ by more than `tol/10` the grid is rejected.
pub fn integral_variation_checks(
    base: &Chart,
    model: &CliffordModel,
    h: &TensorFn,
    psi: &SpinorFn,
    m: usize,
    fd: Fd,
    tol: f64,
) -> Result<Outcome> {
    let n = base.dim();
    let eval = |m: usize| -> Result<[f64; 4]> {
        let (pts, cell) = base.grid(m);
        let stencil = fd.stencil();
        let fams: Vec<Chart> = stencil.iter().map(|&t| family_chart(base, h, t)).collect();
        let rows: Vec<[f64; 10]> = pts
            .par_iter()
            .map(|p| -> Result<[f64; 10]> {
                let geo = base.geometry(p, 2)?;
                let chi = &geo.chi;
                let vol = geo.vol.value();
                let sc = SpinCalc::new(&geo, model)?;
                let ps = sc.eval(psi)?;
                let hf = geo.to_frame(&h(&geo.x));
                let t2 = sc.t2(&ps, 1.0);
                let ric = geo.ric()?;
                let mut out = [0.0; 10];
                out[0] = -0.25 * pair(chi, &t2, &hf).value() * vol;
                out[1] = -pair(chi, ric, &hf).value() * vol;
                for (k, fam) in fams.iter().enumerate() {
                    let gt = fam.geometry(p, 2)?;
                    let sct = SpinCalc::new(&gt, model)?;
                    let pst = sct.eval(psi)?;
                    let d2 = sct.dirac_pow(&pst, 2);
                    out[2 + k] = sct.pair(&d2, &pst).value() * vol;
                    out[6 + k] = gt.scal()?.value() * vol;
                }
                let _ = n;
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let s = |k: usize| rows.iter().map(|r| r[k]).sum::<f64>() * cell;
        let lhs_a = fd.combine(&[vec![s(2)], vec![s(3)], vec![s(4)], vec![s(5)]])[0];
        let lhs_c = fd.combine(&[vec![s(6)], vec![s(7)], vec![s(8)], vec![s(9)]])[0];
        Ok([lhs_a, s(0), lhs_c, s(1)])
    };
    let fine = eval(m)?;
    let coarse = eval(m / 2)?;
    let labels = [
        "T_2 variation LHS",
        "T_2 variation RHS",
        "scalar curvature variation LHS",
        "scalar curvature variation RHS",
    ];
    for k in 0..4 {
        let change = (fine[k] - coarse[k]).abs();
        if change > tol / 10.0 {
            return Err(Error::GridTooCoarse {
                name: labels[k].into(),
                change,
            });
        }
    }
    let mut out = Outcome::default();
    out.push(Check::scalar(
        "variation.integral_t2",
        "integrated variation of (D^2ψ, ψ) against T_2",
        fine[0] - fine[1],
        tol,
    ));
    out.push(Check::scalar(
        "variation.integral_scalar",
        "integrated variation of the scalar curvature against Ric",
        fine[2] - fine[3],
        tol,
    ));
    out.note(
        "variation.grid_change",
        "max change under grid halving",
        (0..4).map(|k| (fine[k] - coarse[k]).abs()).fold(0.0, f64::max),
    );
    Ok(out)
}

/// Spinor operator in a Lagrange functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    /// `(√-1)^r D`
    Dirac,
    DiracSquared,
}

impl Operator {
    pub fn apply(self, sc: &SpinCalc, ps: &[crate::jet::CJet]) -> Vec<crate::jet::CJet> {
        match self {
            Operator::Dirac => spinor_scale(&sc.dirac(ps), sc.model.sig.i_r()),
            Operator::DiracSquared => sc.dirac_pow(ps, 2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WParams {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub nu: f64,
}

/// `W(η, φ) = ∫ {a S + b + εν (σφ^k, φ^k) - ε (σ P φ^k, φ^k)} μ_η` by
/// quadrature on an `m^n` grid.
pub fn functional_w(
    chart: &Chart,
    model: &CliffordModel,
    psi: &SpinorFn,
    p: &WParams,
    k: f64,
    op: Operator,
    m: usize,
) -> Result<f64> {
    let pk = power_field(model, psi, k);
    let (pts, cell) = chart.grid(m);
    if !chart.periodic {
        return Err(Error::Config(format!(
            "functional needs a closed chart, {} is not periodic",
            chart.name
        )));
    }
    let rows: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|pt| -> Result<(f64, f64)> {
            let geo = chart.geometry(pt, 2)?;
            let sc = SpinCalc::new(&geo, model)?;
            let raw = sc.eval(psi)?;
            let sigma = sc.length(&raw).value();
            if sigma.abs() < crate::clifford::LENGTH_FLOOR {
                return Err(Error::ZeroLength(sigma.abs()));
            }
            let sigma = sigma.signum();
            let ps = sc.eval(&pk)?;
            let len = sc.length(&ps).value() * sigma;
            let pv = sc.pair(&op.apply(&sc, &ps), &ps).value() * sigma;
            let integrand = p.a * geo.scal()?.value() + p.b + p.eps * p.nu * len - p.eps * pv;
            Ok((integrand * geo.vol.value(), sigma))
        })
        .collect::<Result<_>>()?;
    let s0 = rows.first().map(|r| r.1).unwrap_or(1.0);
    if rows.iter().any(|r| r.1 != s0) {
        return Err(Error::SignChange);
    }
    Ok(rows.iter().map(|r| r.0).sum::<f64>() * cell)
}

/// Variation formulas for `(φ + tφ_c)^k`: pointwise length (on the grid)
/// and the integrated operator pairing.
#[allow(clippy::too_many_arguments)]
pub fn normalized_power_check(
    chart: &Chart,
    model: &CliffordModel,
    phi: &SpinorFn,
    phic: &SpinorFn,
    k: f64,
    op: Operator,
    m: usize,
    fd: Fd,
) -> Result<Outcome> {
    let (pts, cell) = chart.grid(m);
    // (i) pointwise
    let len_t = |t: f64| -> Result<Vec<f64>> {
        let f = power_field(model, &affine_field(phi, phic, t), k);
        pts.par_iter()
            .map(|p| {
                let x = RJet::seed(p, 0);
                let v = f(&x);
                let raw = affine_field(phi, phic, t)(&x);
                let sigma = model.re_inner_jet(&raw, &raw).value().signum();
                Ok(sigma * model.re_inner_jet(&v, &v).value())
            })
            .collect()
    };
    let lhs1 = fd.derivative(len_t)?;
    let rhs1: Vec<f64> = pts
        .par_iter()
        .map(|p| {
            let x = RJet::seed(p, 0);
            let a = phi(&x);
            let b = phic(&x);
            let len = model.re_inner_jet(&a, &a).value();
            let sigma = len.signum();
            let pc = model.re_inner_jet(&a, &b).value();
            2.0 * (2.0 * k + 1.0) * (sigma * len).powf(2.0 * k) * sigma * pc
        })
        .collect();
    let r1: Vec<f64> = lhs1.iter().zip(&rhs1).map(|(a, b)| a - b).collect();
    // (ii) integrated
    let integral_t = |t: f64| -> Result<f64> {
        let f = power_field(model, &affine_field(phi, phic, t), k);
        let raw = affine_field(phi, phic, t);
        let vals: Vec<f64> = pts
            .par_iter()
            .map(|p| -> Result<f64> {
                let geo = chart.geometry(p, 2)?;
                let sc = SpinCalc::new(&geo, model)?;
                let r = sc.eval(&raw)?;
                let sigma = sc.length(&r).value().signum();
                let ps = sc.eval(&f)?;
                Ok(sigma * sc.pair(&op.apply(&sc, &ps), &ps).value() * geo.vol.value())
            })
            .collect::<Result<_>>()?;
        Ok(vals.iter().sum::<f64>() * cell)
    };
    let lhs2 = fd.scalar_derivative(integral_t)?;
    let pk = power_field(model, phi, k);
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|p| -> Result<f64> {
            let geo = chart.geometry(p, 2)?;
            let sc = SpinCalc::new(&geo, model)?;
            let a = sc.eval(phi)?;
            let b = sc.eval(phic)?;
            let lenj = sc.length(&a);
            let len = lenj.value();
            let sigma = len.signum();
            let ppk = op.apply(&sc, &sc.eval(&pk)?);
            let av = spinor_values(&a);
            let bv = spinor_values(&b);
            let pv = spinor_values(&ppk);
            let sl = sigma * len;
            let term1 =
                4.0 * k * sigma * model.re_inner(&pv, &av) * sl.powf(k - 1.0) * sigma * model.re_inner(&av, &bv);
            let term2 = 2.0 * sigma * model.re_inner(&pv, &bv) * sl.powf(k);
            Ok((term1 + term2) * geo.vol.value())
        })
        .collect::<Result<_>>()?;
    let rhs2 = vals.iter().sum::<f64>() * cell;
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "normalized_power.length",
        "variation of (σφ^k, φ^k)",
        r1,
        1e-7,
    ));
    out.push(Check::scalar(
        "normalized_power.integral",
        "variation of ∫(σPφ^k, φ^k)μ",
        lhs2 - rhs2,
        1e-6,
    ));
    Ok(out)
}

/// `|d/dt W(η_t, ψ + tφ_c)|` at `t = 0` for each perturbation pair, after
/// confirming that `(chart, ψ)` solves the associated system.
#[allow(clippy::too_many_arguments)]
pub fn stationarity_check(
    chart: &Chart,
    model: &CliffordModel,
    psi: &SpinorFn,
    p: &WParams,
    k: f64,
    op: Operator,
    perturbations: &[(TensorFn, SpinorFn)],
    m: usize,
    fd: Fd,
    tol: f64,
) -> Result<Check> {
    let pts = chart.sample_points(8, 0x5eed);
    let s = Setting::new(chart, model, &pts, 3)?;
    let pre = if 2.0 * k + 1.0 == 0.0 {
        let kind = match op {
            Operator::Dirac => Kind::I,
            Operator::DiracSquared => Kind::II,
        };
        residual_cled(
            &s,
            psi,
            &CledParams {
                kind,
                a: p.a,
                c: p.b,
                eps: p.eps,
                f: CharFn::Rayleigh,
            },
        )?
    } else {
        let ep = EdParams {
            a: p.a,
            b: p.b,
            eps: p.eps,
            nu: p.nu,
        };
        match op {
            Operator::DiracSquared => residual_ed2(&s, psi, &ep)?,
            Operator::Dirac => crate::equations::residual_ed1(&s, psi, &ep)?,
        }
    };
    if let Some(bad) = pre.checks.iter().find(|c| !c.pass && !c.name.ends_with("length")) {
        return Err(Error::NotASolution(format!(
            "{} residual {:.3e}",
            bad.name, bad.max_abs_residual
        )));
    }
    let ders: Vec<f64> = perturbations
        .iter()
        .map(|(h, phic)| {
            fd.scalar_derivative(|t| {
                let fam = family_chart(chart, h, t);
                functional_w(&fam, model, &affine_field(psi, phic, t), p, k, op, m)
            })
            .map(f64::abs)
        })
        .collect::<Result<_>>()?;
    let name = format!(
        "stationarity.{}.k{}",
        match op {
            Operator::Dirac => "dirac",
            Operator::DiracSquared => "dirac_squared",
        },
        if k == 0.0 { "0" } else { "-1/2" }
    );
    Ok(Check::vanish(
        &name,
        "first variation of the Lagrange functional at a solution",
        ders,
        tol,
    ))
}

/// Volume of a chart box, for closed-form comparisons.
pub fn box_volume(chart: &Chart) -> f64 {
    chart.domain.iter().map(|(a, b)| b - a).product()
}

pub fn two_pi() -> f64 {
    2.0 * PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spincalc::{constant_field, random_trig_field};
    use crate::warped::unit_spinor;

    #[test]
    fn family_at_zero_is_base() {
        let base = fixtures::flat_torus(2, 0).unwrap();
        let h = random_deformation(2, 3, 0.3);
        let fam = family_chart(&base, &h, 0.0);
        let g0 = base.geometry(&[0.4, 1.1], 1).unwrap();
        let g1 = fam.geometry(&[0.4, 1.1], 1).unwrap();
        for i in 0..2 {
            for a in 0..2 {
                assert!((g0.e[i][a].value() - g1.e[i][a].value()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn metric_deformation_rescales_frame() {
        let base = fixtures::flat_torus(2, 0).unwrap();
        let h = metric_deformation(&base, 1.0);
        let fam = family_chart(&base, &h, 0.1);
        let g = fam.geometry(&[0.4, 1.1], 1).unwrap();
        assert!((g.e[0][0].value() - (-0.05f64).exp()).abs() < 1e-14);
        assert!(g.orthonormality_residual() < 1e-12);
    }

    #[test]
    fn w_of_parallel_spinor() {
        let chart = fixtures::flat_torus(2, 0).unwrap();
        let model = CliffordModel::build(chart.sig).unwrap();
        let psi = constant_field(&unit_spinor(&model));
        let p = WParams {
            a: 1.0,
            b: 0.7,
            eps: 2.0,
            nu: 0.3,
        };
        let w = functional_w(&chart, &model, &psi, &p, 0.0, Operator::DiracSquared, 8).unwrap();
        let vol = 4.0 * PI * PI;
        assert!((w - (0.7 + 0.6) * vol).abs() < 1e-12);
    }

    #[test]
    fn pointwise_checks_on_flat_torus() {
        let base = fixtures::flat_torus(2, 0).unwrap();
        let model = CliffordModel::build(base.sig).unwrap();
        let h = random_deformation(2, 1, 0.3);
        let psi = random_trig_field(&unit_spinor(&model), 2, 2, 0.2);
        let pts = base.sample_points(4, 3);
        let out = pointwise_variation_checks(&base, &model, &h, &psi, &pts, Fd::default()).unwrap();
        for c in &out.checks {
            assert!(c.pass, "{}", c.line());
        }
    }
}
