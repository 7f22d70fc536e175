//! Residual evaluators for the Einstein-Dirac systems and the special
//! spinor equations (WK, WW, weakly T-parallel, reduced WP), together with
//! the divergence identities for the energy-momentum tensors.
//!
//! Every evaluator works pointwise on a [`Setting`] and returns an
//! [`Outcome`] holding one [`Check`] per residual.

use std::sync::Arc;

use rayon::prelude::*;

use crate::clifford::{spinor_mul_real, spinor_scale, spinor_sub, spinor_values, CliffordModel, C64};
use crate::error::{Error, Result};
use crate::geometry::{div_sym, pair, Chart, PointGeometry, ScalarData, ScalarFn};
use crate::jet::{CJet, RJet};
use crate::linalg::JetMat;
use crate::spincalc::{combine, spinor_max, tensor_max, SpinCalc, SpinorFn};

pub use crate::report::{Check, Diagnostic, Expect, Outcome, ResidualReport};

/// Default tolerance for pointwise residuals.
pub const TOL: f64 = 1e-8;

/// Scalar field that may depend on the local geometry.
pub type GeoScalarFn = Arc<dyn Fn(&PointGeometry) -> Result<RJet> + Send + Sync>;
/// Symmetric 2-tensor field in frame components `β(E_i, E_j)`.
pub type GeoTensorFn = Arc<dyn Fn(&PointGeometry) -> Result<JetMat<f64>> + Send + Sync>;

pub fn lift_scalar(f: &ScalarFn) -> GeoScalarFn {
    let f = f.clone();
    Arc::new(move |geo: &PointGeometry| Ok(f(&geo.x)))
}

pub fn constant_scalar(c: f64) -> GeoScalarFn {
    Arc::new(move |geo: &PointGeometry| Ok(geo.x[0].lift(c)))
}

/// `β = η`
pub fn metric_tensor() -> GeoTensorFn {
    Arc::new(|geo: &PointGeometry| Ok(metric_frame(&geo.chi, &geo.x[0])))
}

fn metric_frame(chi: &[f64], like: &RJet) -> JetMat<f64> {
    crate::geometry::tensor::scalar_times_metric(chi, &like.lift(1.0))
}

/// Chart, Clifford model, sample points and jet order of an evaluation.
#[derive(Clone, Copy)]
pub struct Setting<'a> {
    pub chart: &'a Chart,
    pub model: &'a CliffordModel,
    pub points: &'a [Vec<f64>],
    pub order: usize,
}

impl<'a> Setting<'a> {
    pub fn new(chart: &'a Chart, model: &'a CliffordModel, points: &'a [Vec<f64>], order: usize) -> Result<Self> {
        if chart.sig != model.sig {
            return Err(Error::SignatureMismatch(format!(
                "chart {} has signature {}, model {}",
                chart.name, chart.sig, model.sig
            )));
        }
        Ok(Setting {
            chart,
            model,
            points,
            order,
        })
    }

    pub fn n(&self) -> usize {
        self.chart.dim()
    }

    /// Applies `f` at every point, in parallel, preserving point order.
    pub fn map<R: Send>(&self, f: impl Fn(&SpinCalc) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
        self.points
            .par_iter()
            .map(|p| {
                let geo = self.chart.geometry(p, self.order)?;
                let sc = SpinCalc::new(&geo, self.model)?;
                f(&sc)
            })
            .collect()
    }
}

fn column<const K: usize>(rows: &[[f64; K]], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

/// Sign of the spinor length at a point, rejecting zero length.
fn local_sign(len: f64) -> Result<f64> {
    if len.abs() < crate::clifford::LENGTH_FLOOR {
        return Err(Error::ZeroLength(len.abs()));
    }
    Ok(len.signum())
}

/// Common sign of the length across the sampled points.
fn common_sign(signs: &[f64]) -> Result<f64> {
    let s = signs.first().copied().unwrap_or(1.0);
    if signs.iter().any(|&x| x != s) {
        return Err(Error::SignChange);
    }
    Ok(s)
}

/// `a (Ric - S/2 η) - k/2 η`
fn einstein_tensor(geo: &PointGeometry, a: f64, k: f64) -> Result<JetMat<f64>> {
    let ric = geo.ric()?;
    let s = geo.scal()?;
    let n = geo.n();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = ric[i][j].scale(a);
                    if i == j {
                        v -= &(s.scale(a * 0.5).add_scalar(0.5 * k)).scale(geo.chi[i]);
                    }
                    v
                })
                .collect()
        })
        .collect())
}

fn sub_scaled(a: &JetMat<f64>, b: &JetMat<f64>, s: f64) -> JetMat<f64> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - &y.scale(s)).collect())
        .collect()
}

fn add_metric(t: &JetMat<f64>, chi: &[f64], f: &RJet) -> JetMat<f64> {
    let mut out = t.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += &f.scale(chi[i]);
    }
    out
}

/// Parameters of an Einstein-Dirac system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdParams {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub nu: f64,
}

/// `(√-1)^r D ψ = ν_1 ψ` and `a (Ric - S/2 η) - b/2 η = ε/4 T_1`.
pub fn residual_ed1(s: &Setting, psi: &SpinorFn, p: &EdParams) -> Result<Outcome> {
    let ir = s.model.sig.i_r();
    let rows = s.map(|sc| {
        let ps = sc.eval(psi)?;
        let d = spinor_scale(&sc.dirac(&ps), ir);
        let dres = spinor_sub(&d, &spinor_scale(&ps, C64::new(p.nu, 0.0)));
        let e = sub_scaled(&einstein_tensor(sc.geo, p.a, p.b)?, &sc.t1(&ps, 1.0), p.eps / 4.0);
        let (dm, em) = (spinor_max(&dres), tensor_max(&e));
        Ok([dm, em, dm.max(em)])
    })?;
    let mut out = Outcome::default();
    out.push(Check::vanish("ed1.dirac", "ED-I Dirac equation", column(&rows, 0), TOL));
    out.push(Check::vanish(
        "ed1.einstein",
        "ED-I Einstein equation",
        column(&rows, 1),
        TOL,
    ));
    out.push(Check::vanish("ed1.system", "ED-I system", column(&rows, 2), TOL));
    Ok(out)
}

/// `D^2 ψ = ν_2 ψ` and `a (Ric - S/2 η) - b/2 η = ε/4 T_2`.
pub fn residual_ed2(s: &Setting, psi: &SpinorFn, p: &EdParams) -> Result<Outcome> {
    let rows = s.map(|sc| {
        let ps = sc.eval(psi)?;
        let d2 = sc.dirac_pow(&ps, 2);
        let dres = spinor_sub(&d2, &spinor_scale(&ps, C64::new(p.nu, 0.0)));
        let e = sub_scaled(&einstein_tensor(sc.geo, p.a, p.b)?, &sc.t2(&ps, 1.0), p.eps / 4.0);
        let (dm, em) = (spinor_max(&dres), tensor_max(&e));
        Ok([dm, em, dm.max(em)])
    })?;
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "ed2.dirac",
        "ED-II Dirac equation",
        column(&rows, 0),
        TOL,
    ));
    out.push(Check::vanish(
        "ed2.einstein",
        "ED-II Einstein equation",
        column(&rows, 1),
        TOL,
    ));
    out.push(Check::vanish("ed2.system", "ED-II system", column(&rows, 2), TOL));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// `P = (√-1)^r D`
    I,
    /// `P = D^2`
    II,
}

impl Kind {
    pub fn tag(self) -> &'static str {
        match self {
            Kind::I => "cled1",
            Kind::II => "cled2",
        }
    }

    fn apply(self, sc: &SpinCalc, ps: &[CJet]) -> Vec<CJet> {
        match self {
            Kind::I => spinor_scale(&sc.dirac(ps), sc.model.sig.i_r()),
            Kind::II => sc.dirac_pow(ps, 2),
        }
    }

    fn tensor(self, sc: &SpinCalc, ps: &[CJet], sigma: f64) -> JetMat<f64> {
        match self {
            Kind::I => sc.t1(ps, sigma),
            Kind::II => sc.t2(ps, sigma),
        }
    }
}

/// How the characteristic function of a CL-Einstein-Dirac system is obtained.
#[derive(Clone)]
pub enum CharFn {
    Given(GeoScalarFn),
    /// solved from the trace identity `ε(n-1) f_1 = a(n-2) S + c n` (type I)
    Trace,
    /// `(σPψ, ψ) / (σψ, ψ)`
    Rayleigh,
}

#[derive(Clone)]
pub struct CledParams {
    pub kind: Kind,
    pub a: f64,
    pub c: f64,
    pub eps: f64,
    pub f: CharFn,
}

fn char_value(p: &CledParams, sc: &SpinCalc, ps: &[CJet], pps: &[CJet], sigma: f64) -> Result<RJet> {
    let n = sc.n() as f64;
    match &p.f {
        CharFn::Given(f) => f(sc.geo),
        CharFn::Trace => {
            if p.kind != Kind::I {
                return Err(Error::ParameterMismatch(
                    "the trace rule determines f only for the type I system".into(),
                ));
            }
            if p.eps == 0.0 {
                return Err(Error::NonAdmissible("coupling ε must be nonzero".into()));
            }
            Ok(sc
                .geo
                .scal()?
                .scale(p.a * (n - 2.0))
                .add_scalar(p.c * n)
                .scale(1.0 / (p.eps * (n - 1.0))))
        }
        CharFn::Rayleigh => {
            let num = sc.pair(pps, ps).scale(sigma);
            let den = sc.length(ps).scale(sigma);
            num.checked_div(&den)
        }
    }
}

/// CL-Einstein-Dirac system of either type:
/// `Pψ = fψ`, `a (Ric - S/2 η) - c/2 η = ε/4 T - ε/2 f η`, `(σψ, ψ) = 1`.
pub fn residual_cled(s: &Setting, psi: &SpinorFn, p: &CledParams) -> Result<Outcome> {
    let rows = s.map(|sc| {
        let ps = sc.eval(psi)?;
        let len = sc.length(&ps);
        let sigma = local_sign(len.value())?;
        let pps = p.kind.apply(sc, &ps);
        let f = char_value(p, sc, &ps, &pps, sigma)?;
        let eig = spinor_sub(&pps, &spinor_mul_real(&ps, &f));
        let e = sub_scaled(
            &einstein_tensor(sc.geo, p.a, p.c)?,
            &p.kind.tensor(sc, &ps, sigma),
            p.eps / 4.0,
        );
        let e = add_metric(&e, &sc.geo.chi, &f.scale(p.eps / 2.0));
        let n = sc.n() as f64;
        let trace = if p.kind == Kind::I {
            let sc_s = sc.geo.scal()?.value();
            (p.eps * (n - 1.0) * f.value() - p.a * (n - 2.0) * sc_s - p.c * n).abs()
        } else {
            0.0
        };
        Ok([
            spinor_max(&eig),
            tensor_max(&e),
            (sigma * len.value() - 1.0).abs(),
            trace,
            sigma,
            f.value(),
        ])
    })?;
    common_sign(&column(&rows, 4))?;
    let t = p.kind.tag();
    let label = match p.kind {
        Kind::I => "CL-ED-I",
        Kind::II => "CL-ED-II",
    };
    let mut out = Outcome::default();
    out.push(Check::vanish(
        &format!("{t}.eigen"),
        &format!("{label} characteristic equation"),
        column(&rows, 0),
        TOL,
    ));
    out.push(Check::vanish(
        &format!("{t}.einstein"),
        &format!("{label} Einstein equation"),
        column(&rows, 1),
        TOL,
    ));
    out.push(Check::vanish(
        &format!("{t}.length"),
        &format!("{label} unit length"),
        column(&rows, 2),
        TOL,
    ));
    if p.kind == Kind::I {
        out.push(Check::vanish(
            &format!("{t}.trace"),
            "CL-ED-I trace identity",
            column(&rows, 3),
            TOL,
        ));
    }
    let fs = column(&rows, 5);
    let spread =
        fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - fs.iter().cloned().fold(f64::INFINITY, f64::min);
    out.note(
        &format!("{t}.f_spread"),
        "variation of the characteristic function over the points",
        spread,
    );
    Ok(out)
}

/// Equivalent form of the type I system with `f_1` eliminated by the trace
/// identity.
pub fn residual_cled1_equivalent(s: &Setting, psi: &SpinorFn, a: f64, c: f64, eps: f64) -> Result<Outcome> {
    let n = s.n() as f64;
    let ir = s.model.sig.i_r();
    let rows = s.map(|sc| {
        let ps = sc.eval(psi)?;
        let sigma = local_sign(sc.length(&ps).value())?;
        let scal = sc.geo.scal()?;
        let coef = scal.scale(a * (n - 2.0) / (n - 1.0)).add_scalar(c * n / (n - 1.0));
        let d = spinor_scale(&sc.dirac(&ps), ir * eps);
        let dres = spinor_sub(&d, &spinor_mul_real(&ps, &coef));
        let ric = sc.geo.ric()?;
        let t1 = sc.t1(&ps, sigma);
        let m = sc.n();
        let mut e = vec![vec![ric[0][0].zero_like(); m]; m];
        for i in 0..m {
            for j in 0..m {
                let mut v = ric[i][j].scale(a) - t1[i][j].scale(eps / 4.0);
                if i == j {
                    let g = scal.scale(-a / (2.0 * (n - 1.0))).add_scalar(c / (2.0 * (n - 1.0)));
                    v += &g.scale(sc.geo.chi[i]);
                }
                e[i][j] = v;
            }
        }
        Ok([spinor_max(&dres), tensor_max(&e), sigma])
    })?;
    common_sign(&column(&rows, 2))?;
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "cled1.equiv_dirac",
        "CL-ED-I with f_1 eliminated, Dirac part",
        column(&rows, 0),
        TOL,
    ));
    out.push(Check::vanish(
        "cled1.equiv_einstein",
        "CL-ED-I with f_1 eliminated, Einstein part",
        column(&rows, 1),
        TOL,
    ));
    Ok(out)
}

/// WK-spinor equation
/// `∇_X ψ = (√-1)^{3r} β(X)·ψ + n α(X) ψ + X·α·ψ`.
pub fn residual_wk(s: &Setting, psi: &SpinorFn, a: f64, b: f64, nu1: f64) -> Result<Outcome> {
    if nu1 == 0.0 {
        return Err(Error::NonAdmissible("WK-number must be nonzero".into()));
    }
    let n = s.n();
    let nf = n as f64;
    let i3r = s.model.sig.i_3r();
    let rows = s.map(|sc| {
        let geo = sc.geo;
        let ps = sc.eval(psi)?;
        let scal = geo.scal()?;
        let big_k = scal.scale(a * (nf - 2.0)).add_scalar(b * nf);
        if big_k.value().abs() < 1e-12 {
            return Err(Error::NonAdmissible(format!(
                "a(n-2)S + bn vanishes at {:?}",
                geo.point
            )));
        }
        let kinv = big_k.recip()?;
        let alpha: Vec<RJet> = (0..n)
            .map(|i| (&geo.dir(i, scal) * &kinv).scale(a * (nf - 2.0) / (2.0 * (nf - 1.0))))
            .collect();
        let alpha_vec: Vec<RJet> = alpha.iter().zip(&geo.chi).map(|(x, &c)| x.scale(c)).collect();
        let ein = einstein_tensor(geo, a, b)?;
        let covs = sc.cov_all(&ps);
        let alpha_psi = sc.clifford(&alpha_vec, &ps);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let bv: Vec<RJet> = (0..n)
                .map(|j| (&ein[i][j] * &kinv).scale(2.0 * nu1 * geo.chi[j]))
                .collect();
            let rhs1 = spinor_scale(&sc.clifford(&bv, &ps), i3r);
            let rhs2 = spinor_mul_real(&ps, &alpha[i].scale(nf));
            let rhs3 = sc.gamma(i, &alpha_psi);
            let mut r = spinor_sub(&covs[i], &rhs1);
            r = spinor_sub(&r, &rhs2);
            r = spinor_sub(&r, &rhs3);
            worst = worst.max(spinor_max(&r));
        }
        let q = sc.length(&ps).value() / big_k.value();
        Ok([worst, q])
    })?;
    let qs = column(&rows, 1);
    let mean = qs.iter().sum::<f64>() / qs.len().max(1) as f64;
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "wk.equation",
        "WK-spinor equation",
        column(&rows, 0),
        TOL,
    ));
    out.push(Check::vanish(
        "wk.length_ratio",
        "constancy of (ψ,ψ) / (a(n-2)S + bn) for a WK-spinor",
        qs.iter().map(|q| q - mean).collect(),
        TOL,
    ));
    out.note("wk.length_ratio_mean", "mean of (ψ,ψ) / (a(n-2)S + bn)", mean);
    Ok(out)
}

/// WW-spinor equation
/// `∇_X ψ = (√-1)^{3r} (-2a/ε) {Ric(X) - S/(2(n-1)) X + c/(2a(n-1)) X}·ψ`.
pub fn residual_ww(s: &Setting, psi: &SpinorFn, a: f64, c: f64, eps: f64) -> Result<Outcome> {
    if a == 0.0 || eps == 0.0 {
        return Err(Error::NonAdmissible("WW-spinors need a ≠ 0 and ε ≠ 0".into()));
    }
    let n = s.n();
    let nf = n as f64;
    let coef = s.model.sig.i_3r() * (-2.0 * a / eps);
    let rows = s.map(|sc| {
        let geo = sc.geo;
        let ps = sc.eval(psi)?;
        let ric = geo.ric()?;
        let scal = geo.scal()?;
        let diag = scal
            .scale(-1.0 / (2.0 * (nf - 1.0)))
            .add_scalar(c / (2.0 * a * (nf - 1.0)));
        let covs = sc.cov_all(&ps);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let v: Vec<RJet> = (0..n)
                .map(|j| {
                    let mut x = ric[i][j].scale(geo.chi[j]);
                    if i == j {
                        x += &diag;
                    }
                    x
                })
                .collect();
            let r = spinor_sub(&covs[i], &spinor_scale(&sc.clifford(&v, &ps), coef));
            worst = worst.max(spinor_max(&r));
        }
        let len = sc.length(&ps);
        let dl = (0..n).map(|i| geo.dir(i, &len).value().abs()).fold(0.0, f64::max);
        Ok([worst, dl])
    })?;
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "ww.equation",
        "WW-spinor equation",
        column(&rows, 0),
        TOL,
    ));
    out.push(Check::vanish(
        "ww.constant_length",
        "WW-spinors have constant length",
        column(&rows, 1),
        TOL,
    ));
    Ok(out)
}

/// Weakly T-parallel spinor `∇_X ψ = -¼ du(X) ψ - ¼ β(X)·du·ψ` with the
/// consequences `β(du) = du`, `∇_{du} ψ = 0`, `Dψ = (n-1)/4 du·ψ`,
/// `D^2 ψ = f ψ` and the scalar curvature formula, plus the closed form of
/// the second energy-momentum tensor.
pub fn residual_weakly_t_parallel(s: &Setting, psi: &SpinorFn, u: &ScalarFn, beta: &GeoTensorFn) -> Result<Outcome> {
    let n = s.n();
    let nf = n as f64;
    let rows = s.map(|sc| {
        let geo = sc.geo;
        let chi = &geo.chi;
        let ps = sc.eval(psi)?;
        let ud = ScalarData::new(geo, &u(&geo.x));
        let bt = beta(geo)?;
        let tr: f64 = (0..n).map(|i| chi[i] * bt[i][i].value()).sum();
        if (tr - nf).abs() > 1e-8 {
            return Err(Error::BadBetaTrace(tr));
        }
        let covs = sc.cov_all(&ps);
        let gu = sc.clifford(&ud.grad, &ps);
        let mut r44: f64 = 0.0;
        for i in 0..n {
            let bv: Vec<RJet> = (0..n).map(|j| bt[i][j].scale(chi[j])).collect();
            let t1 = spinor_mul_real(&ps, &ud.df[i].scale(0.25));
            let t2 = spinor_scale(&sc.clifford(&bv, &gu), C64::new(0.25, 0.0));
            let r: Vec<CJet> = covs[i]
                .iter()
                .zip(&t1)
                .zip(&t2)
                .map(|((a, b), c)| &(a + b) + c)
                .collect();
            r44 = r44.max(spinor_max(&r));
        }
        let mut r1: f64 = 0.0;
        for i in 0..n {
            let mut v = -&ud.df[i];
            for j in 0..n {
                v += &(&bt[i][j] * &ud.grad[j]);
            }
            r1 = r1.max(v.value().abs());
        }
        let r2 = spinor_max(&combine(&covs, &ud.grad));
        let dps = sc.dirac_from_cov(&covs);
        let r3 = spinor_max(&spinor_sub(&dps, &spinor_scale(&gu, C64::new((nf - 1.0) / 4.0, 0.0))));
        let f = ud.norm2.scale((nf - 1.0).powi(2) / 16.0) + ud.lap.scale((nf - 1.0) / 4.0);
        let d2 = sc.dirac(&dps);
        let r4 = spinor_max(&spinor_sub(&d2, &spinor_mul_real(&ps, &f)));
        let bn2 = pair(chi, &bt, &bt).value();
        let s_pred = 0.25 * ((nf - 1.0).powi(2) + 1.0 - bn2) * ud.norm2.value() + (nf - 1.0) * ud.lap.value();
        let r5 = (geo.scal()?.value() - s_pred).abs();
        let len = sc.length(&ps);
        let sigma = local_sign(len.value())?;
        let t2 = sc.t2(&ps, sigma);
        let mut rt: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let pred = -(nf - 1.0) / 2.0 * ud.hess[i][j].value()
                    - (nf - 1.0) / 4.0 * ud.df[i].value() * ud.df[j].value()
                    + (nf - 1.0) / 4.0 * ud.norm2.value() * bt[i][j].value();
                rt = rt.max((t2[i][j].value() - pred).abs());
            }
        }
        let dl = (0..n).map(|i| geo.dir(i, &len).value().abs()).fold(0.0, f64::max);
        Ok([r44, r1, r2, r3, r4, r5, rt, dl])
    })?;
    let mut out = Outcome::default();
    let specs = [
        ("wtp.equation", "weakly T-parallel equation"),
        ("wtp.beta_du", "β(du) = du"),
        ("wtp.cov_du", "∇_{du} ψ = 0"),
        ("wtp.dirac", "Dψ = (n-1)/4 du·ψ"),
        ("wtp.dirac_square", "D²ψ = ((n-1)²/16 |du|² + (n-1)/4 Δu) ψ"),
        ("wtp.scalar_curvature", "scalar curvature of a weakly T-parallel spinor"),
        (
            "wtp.t2_closed_form",
            "second energy-momentum tensor of a weakly T-parallel spinor",
        ),
        ("wtp.constant_length", "constant length"),
    ];
    for (k, (name, r)) in specs.iter().enumerate() {
        out.push(Check::vanish(name, r, column(&rows, k), TOL));
    }
    Ok(out)
}

/// Reduced WP-spinor `|du|^2 ∇_X ψ = -1/(n-2) {Ric(X) - S/n X}·du·ψ` with
/// `S = c* e^u`. The harmonic property and the gradient/Ricci relations
/// that hold under constant length are reported as diagnostics.
pub fn residual_reduced_wp(s: &Setting, psi: &SpinorFn, u: &ScalarFn, c_star: f64) -> Result<Outcome> {
    let n = s.n();
    if n < 3 {
        return Err(Error::NonAdmissible("reduced WP-spinors need n ≥ 3".into()));
    }
    let nf = n as f64;
    let rows = s.map(|sc| {
        let geo = sc.geo;
        let chi = &geo.chi;
        let ps = sc.eval(psi)?;
        let ux = u(&geo.x);
        let ud = ScalarData::new(geo, &ux);
        let ric = geo.ric()?;
        let scal = geo.scal()?;
        let covs = sc.cov_all(&ps);
        let gu = sc.clifford(&ud.grad, &ps);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let v: Vec<RJet> = (0..n)
                .map(|j| {
                    let mut x = ric[i][j].scale(chi[j]);
                    if i == j {
                        x -= &scal.scale(1.0 / nf);
                    }
                    x
                })
                .collect();
            let lhs = spinor_mul_real(&covs[i], &ud.norm2);
            let rhs = spinor_scale(&sc.clifford(&v, &gu), C64::new(-1.0 / (nf - 2.0), 0.0));
            worst = worst.max(spinor_max(&spinor_sub(&lhs, &rhs)));
        }
        let sres = (scal.value() - c_star * ux.value().exp()).abs();
        let harm = spinor_max(&sc.dirac_from_cov(&covs));
        let cov_du = spinor_max(&combine(&covs, &ud.grad));
        let mut ric_du: f64 = 0.0;
        for i in 0..n {
            let mut v = ud.df[i].scale(-scal.value() / nf);
            for j in 0..n {
                v += &(&ric[i][j] * &ud.grad[j]);
            }
            ric_du = ric_du.max(v.value().abs());
        }
        let len = sc.length(&ps);
        let dl = (0..n).map(|i| geo.dir(i, &len).value().abs()).fold(0.0, f64::max);
        let cov_max = covs.iter().map(|c| spinor_max(c)).fold(0.0, f64::max);
        Ok([worst, sres, harm, cov_du, ric_du, dl, cov_max, len.value()])
    })?;
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "rwp.equation",
        "reduced WP-spinor equation",
        column(&rows, 0),
        TOL,
    ));
    out.push(Check::vanish(
        "rwp.scalar_curvature",
        "S = c* e^u",
        column(&rows, 1),
        TOL,
    ));
    out.push(Check::vanish(
        "rwp.harmonic",
        "reduced WP-spinors are harmonic",
        column(&rows, 2),
        TOL,
    ));
    let mx = |k: usize| column(&rows, k).into_iter().fold(0.0, f64::max);
    out.note("rwp.cov_du", "max |∇_{du} ψ|", mx(3));
    out.note("rwp.ricci_du", "max |Ric(du) - S/n du|", mx(4));
    out.note("rwp.length_derivative", "max |d(ψ,ψ)|", mx(5));
    out.note("rwp.cov_max", "max |∇ψ| (nonzero means not parallel)", mx(6));
    let lens = column(&rows, 7);
    let spread =
        lens.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - lens.iter().cloned().fold(f64::INFINITY, f64::min);
    out.note("rwp.length_spread", "variation of (ψ,ψ) over the points", spread);
    Ok(out)
}

/// Divergence identities for `T_1` and `T_2` of an arbitrary field, with
/// the σ-weighted divergence and σ-weighted tensors. Needs jet order ≥ 3.
pub fn check_divergence_identities(s: &Setting, psi: &SpinorFn, sigma: f64) -> Result<Outcome> {
    let n = s.n();
    let ir = s.model.sig.i_r();
    let sr = s.model.sig.sign_r();
    let rows = s.map(|sc| {
        let ps = sc.eval(psi)?;
        let covs = sc.cov_all(&ps);
        let d1 = sc.dirac_from_cov(&covs);
        let cd1 = sc.cov_all(&d1);
        let d2 = sc.dirac_from_cov(&cd1);
        let cd2 = sc.cov_all(&d2);
        let d3 = sc.dirac_from_cov(&cd2);
        let div1 = div_sym(sc.geo, &sc.t1(&ps, sigma), sigma);
        let div2 = div_sym(sc.geo, &sc.t2(&ps, sigma), sigma);
        let ir_d1 = spinor_scale(&d1, ir);
        let mut w1: f64 = 0.0;
        let mut w2: f64 = 0.0;
        for x in 0..n {
            let r1 = &(&sc.pair(&spinor_scale(&cd1[x], ir), &ps) - &sc.pair(&covs[x], &ir_d1))
                - &sc.pair(&spinor_scale(&sc.gamma(x, &d2), ir), &ps);
            w1 = w1.max((div1[x].value() - sigma * r1.value()).abs());
            let r2 = &(&(&sc.pair(&cd2[x], &ps) - &sc.pair(&covs[x], &d2)) - &sc.pair(&sc.gamma(x, &d3), &ps))
                - &sc.pair(&sc.gamma(x, &d2), &d1).scale(sr);
            w2 = w2.max((div2[x].value() - sigma * r2.value()).abs());
        }
        Ok([w1, w2])
    })?;
    let mut out = Outcome::default();
    out.push(Check::vanish(
        "div.t1",
        "divergence of the first energy-momentum tensor",
        column(&rows, 0),
        TOL,
    ));
    out.push(Check::vanish(
        "div.t2",
        "divergence of the second energy-momentum tensor",
        column(&rows, 1),
        TOL,
    ));
    Ok(out)
}

/// `max |div(¼ T - f/2 η)|` per point for an eigenspinor `Pψ = fψ`, with
/// `σ` the sign of the length.
pub fn conservation_residuals(s: &Setting, psi: &SpinorFn, kind: Kind, f: &GeoScalarFn) -> Result<Vec<f64>> {
    let n = s.n();
    let rows = s.map(|sc| {
        let ps = sc.eval(psi)?;
        let sigma = local_sign(sc.length(&ps).value())?;
        let t = kind.tensor(sc, &ps, sigma);
        let fv = f(sc.geo)?;
        let mut m = t.clone();
        for i in 0..n {
            for j in 0..n {
                m[i][j] = t[i][j].scale(0.25);
                if i == j {
                    m[i][j] -= &fv.scale(0.5 * sc.geo.chi[i]);
                }
            }
        }
        let d = div_sym(sc.geo, &m, sigma);
        Ok(d.iter().map(|x| x.value().abs()).fold(0.0, f64::max))
    })?;
    Ok(rows)
}

/// Conservation law of a constant-length eigenspinor.
pub fn check_conservation(s: &Setting, psi: &SpinorFn, kind: Kind, f: &GeoScalarFn, tol: f64) -> Result<Check> {
    let r = conservation_residuals(s, psi, kind, f)?;
    let (name, reference) = match kind {
        Kind::I => ("conservation.t1", "div(¼T_1 - f_1/2 η) = 0 under unit length"),
        Kind::II => ("conservation.t2", "div(¼T_2 - f_2/2 η) = 0 under unit length"),
    };
    Ok(Check::vanish(name, reference, r, tol))
}

/// Values of a field at the sample points (order-0 evaluation).
pub fn sample_values(s: &Setting, psi: &SpinorFn) -> Result<Vec<crate::clifford::Spinor>> {
    s.map(|sc| Ok(spinor_values(&sc.eval(psi)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spincalc::constant_field;
    use crate::warped::unit_spinor;

    #[test]
    fn parallel_spinor_on_flat_torus_solves_trivial_ed1() {
        let chart = fixtures::flat_torus(3, 0).unwrap();
        let model = CliffordModel::build(chart.sig).unwrap();
        let pts = chart.sample_points(4, 2);
        let s = Setting::new(&chart, &model, &pts, 2).unwrap();
        let psi = constant_field(&unit_spinor(&model));
        let p = EdParams {
            a: 1.0,
            b: 0.0,
            eps: 1.0,
            nu: 0.0,
        };
        assert!(residual_ed1(&s, &psi, &p).unwrap().all_pass());
    }

    #[test]
    fn wk_needs_admissible_data() {
        let chart = fixtures::flat_torus(3, 0).unwrap();
        let model = CliffordModel::build(chart.sig).unwrap();
        let pts = chart.sample_points(2, 2);
        let s = Setting::new(&chart, &model, &pts, 3).unwrap();
        let psi = constant_field(&unit_spinor(&model));
        assert!(matches!(
            residual_wk(&s, &psi, 1.0, 0.0, 1.0),
            Err(Error::NonAdmissible(_))
        ));
        assert!(matches!(
            residual_wk(&s, &psi, 1.0, 1.0, 0.0),
            Err(Error::NonAdmissible(_))
        ));
    }

    #[test]
    fn bad_beta_trace_rejected() {
        let chart = fixtures::flat_torus(3, 0).unwrap();
        let model = CliffordModel::build(chart.sig).unwrap();
        let pts = chart.sample_points(2, 2);
        let s = Setting::new(&chart, &model, &pts, 3).unwrap();
        let psi = constant_field(&unit_spinor(&model));
        let u: ScalarFn = Arc::new(|x: &[RJet]| x[0].sin());
        let twice: GeoTensorFn = Arc::new(|geo: &PointGeometry| {
            Ok(crate::geometry::tensor::scalar_times_metric(
                &geo.chi,
                &geo.x[0].lift(2.0),
            ))
        });
        assert!(matches!(
            residual_weakly_t_parallel(&s, &psi, &u, &twice),
            Err(Error::BadBetaTrace(_))
        ));
    }
}
