//! Einstein-Dirac systems on known solutions, the divergence identities and
//! the conservation laws.

use std::sync::Arc;

use crate::clifford::CliffordModel;
use crate::conformal::{conformal_chart, transported_char};
use crate::equations::{
    check_conservation, check_divergence_identities, conservation_residuals, constant_scalar, residual_cled,
    residual_cled1_equivalent, residual_ed1, residual_ed2, residual_wk, residual_ww, CharFn, Check, CledParams,
    EdParams, GeoScalarFn, Kind, Outcome, Setting,
};
use crate::error::Result;
use crate::geometry::PointGeometry;
use crate::jet::RJet;
use crate::solutions::{
    conformal_factors, imaginary_killing_spinor, parallel_unit_spinor, s3_killing_spinor, scaled_parallel_spinor,
};
use crate::spincalc::{random_polynomial_field, tensor_max, SpinCalc, SpinorFn};

use super::Ctx;

pub(super) fn run(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.extend(trivial(ctx)?);
    out.extend(sphere(ctx)?);
    out.extend(separation(ctx)?);
    out.extend(divergence(ctx)?);
    out.extend(conservation(ctx)?);
    Ok(out)
}

/// Parallel spinors on flat tori with every coupling zeroed.
fn trivial(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    for fx in ctx.fixtures(&["T3_flat", "T21_flat"])? {
        let model = ctx.model(&fx)?;
        let pts = ctx.points(&fx, "trivial");
        let s = Setting::new(&fx.chart, &model, &pts, ctx.order(2))?;
        let psi = parallel_unit_spinor(&model);
        let zero = EdParams {
            a: 1.0,
            b: 0.0,
            eps: 1.0,
            nu: 0.0,
        };
        let mut o = Outcome::default();
        o.extend(residual_ed1(&s, &psi, &zero)?);
        o.extend(residual_ed2(&s, &psi, &zero)?);
        for kind in [Kind::I, Kind::II] {
            let p = CledParams {
                kind,
                a: 1.0,
                c: 0.0,
                eps: 1.0,
                f: CharFn::Given(constant_scalar(0.0)),
            };
            o.extend(residual_cled(&s, &psi, &p)?);
        }
        o.extend(residual_cled1_equivalent(&s, &psi, 1.0, 0.0, 1.0)?);
        o.extend(residual_ww(&s, &psi, 1.0, 0.0, 1.0)?);
        o.override_tol(1e-12);
        out.extend(o.prefixed(&format!("trivial.{}", fx.spec.name)));
    }
    Ok(out)
}

/// The Killing spinor of the left-invariant `S^3` frame: a unit WW-spinor
/// with `a = 1, c = 0, ε = 2`, hence CL-ED-I, a WK-spinor under the
/// dictionary and an ED-I solution.
fn sphere(ctx: &Ctx) -> Result<Outcome> {
    if !ctx.wants("S3_hopf") {
        return Ok(Outcome::default());
    }
    let fx = ctx.registry.build("S3_hopf")?;
    let model = ctx.model(&fx)?;
    let pts = ctx.points(&fx, "killing");
    let s = Setting::new(&fx.chart, &model, &pts, ctx.order(2))?;
    let psi = s3_killing_spinor(&model);
    let (a, c, eps) = (1.0, 0.0, 2.0);
    let m = 3.0;
    let scal = 6.0;
    // WW ↔ WK dictionary at constant S
    let b = -(a * (m - 2.0) * scal + c) / (m - 1.0);
    let nu1 = (a * (m - 2.0) * scal + c * m) / (eps * (m - 1.0));

    let mut out = Outcome::default();
    out.extend(residual_ww(&s, &psi, a, c, eps)?);
    out.extend(residual_wk(&s, &psi, a, b, nu1)?);
    out.extend(residual_cled(
        &s,
        &psi,
        &CledParams {
            kind: Kind::I,
            a,
            c,
            eps,
            f: CharFn::Trace,
        },
    )?);
    out.extend(residual_cled1_equivalent(&s, &psi, a, c, eps)?);
    let ed1 = EdParams { a, b, eps, nu: nu1 };
    out.extend(residual_ed1(&s, &psi, &ed1)?);
    out.extend(ed1_implies_ed2(&s, &psi, &ed1)?);
    out.note("dictionary.b", "WK parameter b from the WW data", b);
    out.note("dictionary.nu1", "WK number from the WW data", nu1);
    Ok(out.prefixed("S3_hopf"))
}

/// `ν_2 = (-1)^r ν_1^2`, `ε_2 = (-1)^r ε_1 / (2ν_1)`: `T_2 = 2 (-1)^r ν_1 T_1`
/// for an ED-I solution.
pub(super) fn ed1_implies_ed2(s: &Setting, psi: &SpinorFn, p: &EdParams) -> Result<Outcome> {
    let sr = s.model.sig.sign_r();
    let q = EdParams {
        a: p.a,
        b: p.b,
        eps: sr * p.eps / (2.0 * p.nu),
        nu: sr * p.nu * p.nu,
    };
    let mut out = residual_ed2(s, psi, &q)?;
    out.checks.retain(|c| c.name == "ed2.system");
    Ok(out.prefixed("from_ed1"))
}

/// The imaginary Killing spinor of `H^3` solves ED-II but not ED-I.
fn separation(ctx: &Ctx) -> Result<Outcome> {
    if !ctx.wants("H3") {
        return Ok(Outcome::default());
    }
    let fx = ctx.registry.build("H3")?;
    let model = ctx.model(&fx)?;
    let pts = ctx.points(&fx, "separation");
    let s = Setting::new(&fx.chart, &model, &pts, ctx.order(2))?;
    let (psi, nu1) = imaginary_killing_spinor(&model)?;
    let n = 3.0;
    let sr = model.sig.sign_r();
    let a = 1.0;
    let scal = -n * (n - 1.0);
    let b = -a * (n - 2.0) * scal / n;
    let mut out = Outcome::default();
    out.extend(residual_ed2(
        &s,
        &psi,
        &EdParams {
            a,
            b,
            eps: 1.0,
            nu: -sr * nu1 * nu1,
        },
    )?);
    let rows = s.map(|sc| {
        let ps = sc.eval(&psi)?;
        Ok(tensor_max(&sc.t2(&ps, 1.0)))
    })?;
    out.push(Check::vanish(
        "t2_vanishes",
        "T_2 = 0 for the imaginary Killing spinor",
        rows,
        1e-12,
    ));
    let ed1 = residual_ed1(
        &s,
        &psi,
        &EdParams {
            a,
            b,
            eps: 1.0,
            nu: nu1,
        },
    )?;
    for (name, reference) in [
        (
            "ed1.einstein",
            "ED-I Einstein equation fails for the imaginary Killing spinor",
        ),
        (
            "ed1.dirac",
            "ED-I Dirac equation fails for the imaginary Killing spinor",
        ),
    ] {
        let c = ed1.get(name).expect("ed1 check present");
        out.push(Check::exceed(
            &format!("{name}_exceeds"),
            reference,
            c.per_point.clone(),
            1e-2,
            0.9,
        ));
        out.note(
            &format!("{name}_max"),
            "ED-I residual of the imaginary Killing spinor",
            c.max_abs_residual,
        );
    }
    out.note("nu1", "imaginary Killing number", nu1);
    Ok(out.prefixed("H3"))
}

/// Divergence identities for random fields, with `σ = 1` gated and
/// `σ = -1` recorded.
fn divergence(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    for fx in ctx.fixtures(&["T2_flat", "S2", "T21_flat"])? {
        let model = ctx.model(&fx)?;
        let pts = ctx.points(&fx, "divergence");
        let s = Setting::new(&fx.chart, &model, &pts, ctx.order(3))?;
        let center: Vec<f64> = fx.chart.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let mut o = Outcome::default();
        let mut minus: f64 = 0.0;
        for k in 0..5u64 {
            let psi = random_polynomial_field(model.dim(), &center, ctx.seed(&format!("{}/div{k}", fx.spec.name)), 0.5);
            o.merge(check_divergence_identities(&s, &psi, 1.0)?);
            let m = check_divergence_identities(&s, &psi, -1.0)?;
            minus = m.checks.iter().map(|c| c.max_abs_residual).fold(minus, f64::max);
        }
        o.note("div.sigma_minus", "divergence identities evaluated with σ = -1", minus);
        out.extend(o.prefixed(&fx.spec.name));
    }
    Ok(out)
}

fn conservation(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    if ctx.wants("S3_hopf") {
        let fx = ctx.registry.build("S3_hopf")?;
        let model = ctx.model(&fx)?;
        let pts = ctx.points(&fx, "conservation");
        let s = Setting::new(&fx.chart, &model, &pts, ctx.order(3))?;
        let psi = s3_killing_spinor(&model);
        let sr = model.sig.sign_r();
        let mut o = Outcome::default();
        o.push(check_conservation(&s, &psi, Kind::I, &constant_scalar(1.5), 1e-7)?);
        o.push(check_conservation(
            &s,
            &psi,
            Kind::II,
            &constant_scalar(sr * 2.25),
            1e-7,
        )?);
        out.extend(o.prefixed("S3_hopf"));
    }
    if ctx.wants("T3_flat") {
        let fx = ctx.registry.build("T3_flat")?;
        let model = ctx.model(&fx)?;
        let pts = ctx.points(&fx, "conservation");
        let (_, u) = conformal_factors(&fx.chart).remove(0);
        let conf = conformal_chart(&fx.chart, &u);
        let s = Setting::new(&conf, &model, &pts, ctx.order(3))?;
        let f2 = transported_char(&u);
        let mut o = Outcome::default();
        o.push(check_conservation(
            &s,
            &parallel_unit_spinor(&model),
            Kind::II,
            &f2,
            1e-7,
        )?);
        o.push(Check::exceed(
            "conservation.t2_non_unit",
            "a constant length other than 1 breaks div(¼T_2 - f_2/2 η) = 0",
            conservation_residuals(&s, &scaled_parallel_spinor(&model), Kind::II, &f2)?,
            1e-3,
            0.9,
        ));
        out.extend(o.prefixed("T3_conformal"));

        // h φ with φ parallel: D^2(hφ) = f_2 hφ with non-constant f_2 and length h^2
        let s = Setting::new(&fx.chart, &model, &pts, ctx.order(3))?;
        let psi = modulated_parallel_spinor(&model);
        let f2 = rayleigh_char(&model, &psi);
        let mut o = Outcome::default();
        let mut eig = residual_cled(
            &s,
            &psi,
            &CledParams {
                kind: Kind::II,
                a: 1.0,
                c: 0.0,
                eps: 1.0,
                f: CharFn::Given(f2.clone()),
            },
        )?;
        eig.checks.retain(|c| c.name == "cled2.eigen");
        o.extend(eig.prefixed("witness"));
        o.push(Check::exceed(
            "conservation.t2_non_constant",
            "a D^2-eigenspinor of non-constant length breaks div(¼T_2 - f_2/2 η) = 0",
            conservation_residuals(&s, &psi, Kind::II, &f2)?,
            1e-3,
            0.9,
        ));
        out.extend(o.prefixed("T3_flat"));
    }
    Ok(out)
}

/// `(1.5 + 0.5 sin x_1 cos x_2) φ` for a unit parallel `φ`.
fn modulated_parallel_spinor(model: &CliffordModel) -> SpinorFn {
    let base = parallel_unit_spinor(model);
    Arc::new(move |x: &[RJet]| {
        let h = (&x[0].sin() * &x[1].cos()).scale(0.5).add_scalar(1.5).to_complex();
        base(x).iter().map(|c| c * &h).collect()
    })
}

/// `(σ D^2ψ, ψ) / (σψ, ψ)`, evaluated in the geometry it is called with.
fn rayleigh_char(model: &CliffordModel, psi: &SpinorFn) -> GeoScalarFn {
    let (model, psi) = (model.clone(), psi.clone());
    Arc::new(move |geo: &PointGeometry| {
        let sc = SpinCalc::new(geo, &model)?;
        let ps = sc.eval(&psi)?;
        sc.pair(&sc.dirac_pow(&ps, 2), &ps).checked_div(&sc.length(&ps))
    })
}
