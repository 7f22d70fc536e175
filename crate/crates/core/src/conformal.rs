//! Conformal changes `η_2 = e^u η_1` with frames `F̄_i = e^{-u/2} F_i`.
//!
//! Spinor components are identified through the frames, so a field on
//! `η_1` is reused as is on `η_2`. The laws below are checked against the
//! generic frame pipeline run on the transformed chart.

use std::sync::Arc;

use rayon::prelude::*;

use crate::clifford::{spinor_mul_real, spinor_scale, spinor_sub, CliffordModel, C64};
use crate::equations::{
    residual_cled, residual_weakly_t_parallel, CharFn, Check, CledParams, GeoScalarFn, GeoTensorFn, Kind, Outcome,
    Setting, TOL,
};
use crate::error::{Error, Result};
use crate::geometry::{Chart, PointGeometry, ScalarData, ScalarFn};
use crate::jet::RJet;
use crate::linalg::JetMat;
use crate::spincalc::{combine, spinor_max, SpinCalc, SpinorFn};

pub fn conformal_chart(base: &Chart, u: &ScalarFn) -> Chart {
    let metric = base.metric_fn();
    let frame = base.frame_fn();
    let (m1, u1, u2) = (metric.clone(), u.clone(), u.clone());
    let g2 = Arc::new(move |x: &[RJet]| {
        let w = u1(x).exp();
        m1(x).iter().map(|row| row.iter().map(|g| g * &w).collect()).collect()
    });
    let f2 = Arc::new(move |x: &[RJet], _g: &JetMat<f64>| {
        let g1 = metric(x);
        let e1 = frame(x, &g1)?;
        let w = u2(x).scale(-0.5).exp();
        Ok(e1.iter().map(|row| row.iter().map(|v| v * &w).collect()).collect())
    });
    Chart::new(format!("exp(u)*{}", base.name), base.sig, base.domain.clone(), g2)
        .with_frame(f2)
        .periodic(base.periodic)
}

struct Pair<'a> {
    g1: PointGeometry,
    g2: PointGeometry,
    model: &'a CliffordModel,
}

fn pairs<'a, R: Send>(
    base: &Chart,
    conf: &Chart,
    model: &'a CliffordModel,
    points: &[Vec<f64>],
    order: usize,
    f: impl Fn(&Pair<'a>) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    points
        .par_iter()
        .map(|p| {
            let pr = Pair {
                g1: base.geometry(p, order)?,
                g2: conf.geometry(p, order)?,
                model,
            };
            f(&pr)
        })
        .collect()
}

/// Conformal transformation laws of the spinor derivative, the Dirac
/// operator and its square, for an arbitrary field. The right-hand sides
/// use only `η_1` data and `u`.
pub fn check_conformal_laws(
    base: &Chart,
    model: &CliffordModel,
    u: &ScalarFn,
    psi: &SpinorFn,
    points: &[Vec<f64>],
    order: usize,
) -> Result<Outcome> {
    let conf = conformal_chart(base, u);
    let nf = base.dim() as f64;
    let rows = pairs(base, &conf, model, points, order, |pr| {
        let sc1 = SpinCalc::new(&pr.g1, pr.model)?;
        let sc2 = SpinCalc::new(&pr.g2, pr.model)?;
        let ps = sc1.eval(psi)?;
        let ux = u(&pr.g1.x);
        let ud = ScalarData::new(&pr.g1, &ux);
        let em = ux.scale(-0.5).exp();
        let e1 = ux.scale(-1.0).exp();
        let covs1 = sc1.cov_all(&ps);
        let gu_psi = sc1.clifford(&ud.grad, &ps);
        let mut w1: f64 = 0.0;
        for i in 0..sc1.n() {
            let lhs = sc2.cov(&ps, i);
            let mut rhs = spinor_sub(&covs1[i], &spinor_mul_real(&ps, &ud.df[i].scale(0.25)));
            rhs = spinor_sub(&rhs, &spinor_scale(&sc1.gamma(i, &gu_psi), C64::new(0.25, 0.0)));
            w1 = w1.max(spinor_max(&spinor_sub(&lhs, &spinor_mul_real(&rhs, &em))));
        }
        let d1 = sc1.dirac_from_cov(&covs1);
        let d2 = sc2.dirac(&ps);
        let rhs2: Vec<_> = d1
            .iter()
            .zip(&gu_psi)
            .map(|(a, b)| &a.mul_real(&em) + &b.mul_real(&em).scale_real((nf - 1.0) / 4.0))
            .collect();
        let w2 = spinor_max(&spinor_sub(&d2, &rhs2));
        // η_2 quantities of u expressed through η_1
        let norm2_2 = &ud.norm2 * &e1;
        let lap2 = &(&ud.lap - &ud.norm2.scale((nf - 2.0) / 2.0)) * &e1;
        let dd2 = sc2.dirac(&d2);
        let dd1 = sc1.dirac(&d1);
        let grad2_d1: Vec<_> = sc1.clifford(&ud.grad, &d1).iter().map(|v| v.mul_real(&em)).collect();
        let cov_grad = combine(&covs1, &ud.grad);
        let scal_coef = norm2_2.scale((nf - 1.0).powi(2) / 16.0) + lap2.scale((nf - 1.0) / 4.0);
        let mut rhs3 = spinor_mul_real(&dd1, &e1);
        rhs3 = spinor_sub(&rhs3, &spinor_mul_real(&grad2_d1, &em.scale(0.5)));
        rhs3 = spinor_sub(&rhs3, &spinor_mul_real(&cov_grad, &e1.scale((nf - 1.0) / 2.0)));
        rhs3 = rhs3
            .iter()
            .zip(&spinor_mul_real(&ps, &scal_coef))
            .map(|(a, b)| a + b)
            .collect();
        let w3 = spinor_max(&spinor_sub(&dd2, &rhs3));
        Ok([w1, w2, w3])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "conformal.spinor_derivative",
        "conformal law of the spinor derivative",
        col(0),
        TOL,
    ));
    out.push(Check::vanish(
        "conformal.dirac",
        "conformal law of the Dirac operator",
        col(1),
        TOL,
    ));
    out.push(Check::vanish(
        "conformal.dirac_square",
        "conformal law of the squared Dirac operator",
        col(2),
        TOL,
    ));
    Ok(out)
}

/// Transformation of `Ric - S/2 η` under `η_2 = e^u η_1`, with the
/// `η_1` curvature and the `η_2` derivatives of `u`; plus the underlying
/// Ricci and scalar curvature relations.
pub fn check_curvature_laws(
    base: &Chart,
    model: &CliffordModel,
    u: &ScalarFn,
    points: &[Vec<f64>],
    order: usize,
) -> Result<Outcome> {
    let conf = conformal_chart(base, u);
    let n = base.dim();
    let nf = n as f64;
    let rows = pairs(base, &conf, model, points, order, |pr| {
        let (g1, g2) = (&pr.g1, &pr.g2);
        let chi = &g1.chi;
        let ux = u(&g1.x);
        let w = ux.scale(-1.0).exp().value();
        let d2 = ScalarData::new(g2, &ux);
        let (r1, s1) = (g1.ric()?, g1.scal()?.value());
        let (r2, s2) = (g2.ric()?, g2.scal()?.value());
        let (lap, nrm) = (d2.lap.value(), d2.norm2.value());
        let mut wl: f64 = 0.0;
        let mut wr: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let eta = if i == j { chi[i] } else { 0.0 };
                let hess = d2.hess[i][j].value();
                let dd = d2.df[i].value() * d2.df[j].value();
                let lhs = r2[i][j].value() - 0.5 * s2 * eta;
                let rhs = w * (r1[i][j].value() - 0.5 * s1 * eta)
                    - (nf - 2.0) / 2.0 * hess
                    - (nf - 2.0) / 4.0 * dd
                    - (nf - 2.0) / 2.0 * lap * eta
                    - (nf - 2.0) * (nf - 3.0) / 8.0 * nrm * eta;
                wl = wl.max((lhs - rhs).abs());
                let ric_rhs =
                    -(nf - 2.0) / 2.0 * hess - (nf - 2.0) / 4.0 * dd + 0.5 * lap * eta + (nf - 2.0) / 4.0 * nrm * eta;
                wr = wr.max((r2[i][j].value() - w * r1[i][j].value() - ric_rhs).abs());
            }
        }
        let ws = (s2 - w * s1 - (nf - 1.0) * lap - (nf - 1.0) * (nf - 2.0) / 4.0 * nrm).abs();
        Ok([wl, wr, ws])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "curvature.einstein_tensor",
        "conformal change of Ric - S/2 η",
        col(0),
        TOL,
    ));
    out.push(Check::vanish(
        "curvature.ricci",
        "conformal change of the Ricci tensor",
        col(1),
        TOL,
    ));
    out.push(Check::vanish(
        "curvature.scalar",
        "conformal change of the scalar curvature",
        col(2),
        TOL,
    ));
    Ok(out)
}

/// The tensor `γ` on `η_2` built from `η_1` data:
/// `γ(X̄, Ȳ) = 4/(n-2) (Ric_1 - S_1/n η_1)(X, Y) / |du|_1^2 + η_1(X, Y)`.
pub fn transported_beta(base: &Chart, u: &ScalarFn) -> GeoTensorFn {
    let (base, u) = (base.clone(), u.clone());
    Arc::new(move |g2: &PointGeometry| {
        let g1 = base.geometry(&g2.point, g2.order)?;
        let n = g1.n();
        let nf = n as f64;
        let ud = ScalarData::new(&g1, &u(&g1.x));
        if ud.norm2.value().abs() < 1e-12 {
            return Err(Error::NonAdmissible(format!("du vanishes at {:?}", g1.point)));
        }
        let inv = ud.norm2.recip()?;
        let ric = g1.ric()?;
        let scal = g1.scal()?;
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut t = ric[i][j].clone();
                        if i == j {
                            t -= &scal.scale(g1.chi[i] / nf);
                        }
                        let mut v = (&t * &inv).scale(4.0 / (nf - 2.0));
                        if i == j {
                            v = v.add_scalar(g1.chi[i]);
                        }
                        v
                    })
                    .collect()
            })
            .collect())
    })
}

/// Transport of a reduced WP-spinor on `η_1` to a WP-spinor on
/// `η_2 = e^u η_1`: the weakly T-parallel equation with `β = γ`, the trace
/// of `γ`, and `Φ = |du|^2 γ`. Returns the checks and `γ`.
#[allow(clippy::too_many_arguments)]
pub fn wp_transport(
    base: &Chart,
    model: &CliffordModel,
    u: &ScalarFn,
    psi: &SpinorFn,
    a: f64,
    c: f64,
    c_star: f64,
    points: &[Vec<f64>],
    order: usize,
) -> Result<(Outcome, GeoTensorFn)> {
    let n = base.dim();
    let nf = n as f64;
    if a == 0.0 {
        return Err(Error::NonAdmissible("a must be nonzero".into()));
    }
    let want = -c * nf / (a * (nf - 2.0));
    if (c_star - want).abs() > 1e-12 * (1.0 + want.abs()) {
        return Err(Error::ParameterMismatch(format!(
            "c* = {c_star} but -cn/(a(n-2)) = {want}"
        )));
    }
    let conf = conformal_chart(base, u);
    let gamma = transported_beta(base, u);
    let s2 = Setting::new(&conf, model, points, order)?;
    let wtp = residual_weakly_t_parallel(&s2, psi, u, &gamma)?;
    let mut out = Outcome::default();
    for c in wtp.checks {
        if c.name == "wtp.equation" {
            out.push(Check {
                name: "transport.weakly_t_parallel".into(),
                reference: "transported spinor solves the weakly T-parallel equation with β = γ".into(),
                ..c
            });
        } else {
            out.note(
                &format!("transport.{}", c.name),
                format!("{} on the transported spinor", c.reference),
                c.max_abs_residual,
            );
        }
    }
    let rows: Vec<[f64; 2]> = points
        .par_iter()
        .map(|p| -> Result<[f64; 2]> {
            let g2 = conf.geometry(p, order)?;
            let chi = &g2.chi;
            let gm = gamma(&g2)?;
            let tr: f64 = (0..n).map(|i| chi[i] * gm[i][i].value()).sum();
            let ud = ScalarData::new(&g2, &u(&g2.x));
            let (ric, scal) = (g2.ric()?, g2.scal()?.value());
            let (nrm, lap) = (ud.norm2.value(), ud.lap.value());
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let eta = if i == j { chi[i] } else { 0.0 };
                    let phi = 4.0 / (nf - 2.0) * (ric[i][j].value() - 0.5 * scal * eta)
                        - 2.0 * c / (a * (nf - 2.0)) * eta
                        + 2.0 * ud.hess[i][j].value()
                        + ud.df[i].value() * ud.df[j].value()
                        + ((nf - 1.0) / 2.0 * nrm + 2.0 * lap) * eta;
                    worst = worst.max((phi - nrm * gm[i][j].value()).abs());
                }
            }
            Ok([(tr - nf).abs(), worst])
        })
        .collect::<Result<_>>()?;
    out.push(Check::vanish(
        "transport.gamma_trace",
        "trace of the transported tensor γ",
        rows.iter().map(|r| r[0]).collect(),
        TOL,
    ));
    out.push(Check::vanish(
        "transport.phi_equals_gamma",
        "Φ = |du|^2 γ on the conformal metric",
        rows.iter().map(|r| r[1]).collect(),
        TOL,
    ));
    Ok((out, gamma))
}

/// `f = (n-1)^2/16 |du|^2 + (n-1)/4 Δu` on the geometry it is evaluated in.
pub fn transported_char(u: &ScalarFn) -> GeoScalarFn {
    let u = u.clone();
    Arc::new(move |geo: &PointGeometry| {
        let nf = geo.n() as f64;
        let ud = ScalarData::new(geo, &u(&geo.x));
        Ok(ud.norm2.scale((nf - 1.0).powi(2) / 16.0) + ud.lap.scale((nf - 1.0) / 4.0))
    })
}

/// CL-Einstein-Dirac type II check for a WP-spinor with
/// `ε = 4a(n-2)/(n-1)` and `f` as in [`transported_char`].
pub fn transported_cled2_check(s: &Setting, psi: &SpinorFn, u: &ScalarFn, a: f64, c: f64) -> Result<Outcome> {
    let nf = s.n() as f64;
    let p = CledParams {
        kind: Kind::II,
        a,
        c,
        eps: 4.0 * a * (nf - 2.0) / (nf - 1.0),
        f: CharFn::Given(transported_char(u)),
    };
    residual_cled(s, psi, &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spincalc::random_polynomial_field;

    #[test]
    fn laws_on_flat_torus() {
        let base = fixtures::flat_torus(3, 0).unwrap();
        let model = CliffordModel::build(base.sig).unwrap();
        let u: ScalarFn = Arc::new(|x: &[RJet]| (&x[0] + &x[1]).sin().scale(0.3));
        let psi = random_polynomial_field(model.dim(), &[1.0, 1.0, 1.0], 4, 0.4);
        let pts = base.sample_points(3, 11);
        let out = check_conformal_laws(&base, &model, &u, &psi, &pts, 3).unwrap();
        assert!(out.all_pass(), "{:#?}", out.checks);
        let out = check_curvature_laws(&base, &model, &u, &pts, 3).unwrap();
        assert!(out.all_pass(), "{:#?}", out.checks);
    }
}
