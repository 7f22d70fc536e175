//! Variation formulas under metric deformations and stationarity of the
//! Lagrange functionals at the flat-torus solution.

use crate::equations::{Check, Outcome};
use crate::error::Result;
use crate::spincalc::{constant_field, random_trig_field, SpinorFn};
use crate::variation::{
    box_volume, functional_w, integral_variation_checks, metric_deformation, normalized_power_check,
    pointwise_variation_checks, random_deformation, stationarity_check, Fd, Operator, WParams,
};
use crate::warped::unit_spinor;

use super::Ctx;

const DEFORMATIONS: u64 = 10;
const PERTURBATIONS: u64 = 10;
const STATIONARITY_GRID: usize = 32;

pub(super) fn run(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.extend(pointwise(ctx)?);
    out.extend(integrals(ctx)?);
    out.extend(functional(ctx)?);
    out.extend(stationarity(ctx)?);
    Ok(out)
}

fn pointwise(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    for (name, count) in [("T2_flat", DEFORMATIONS), ("T21_flat", DEFORMATIONS), ("S2", 3)] {
        let Some(fx) = ctx.fixtures(&[name])?.pop() else {
            continue;
        };
        let model = ctx.model(&fx)?;
        let n = fx.chart.dim();
        let pts = ctx.points(&fx, "variation");
        let mut o = Outcome::default();
        for k in 0..count {
            let h = random_deformation(n, ctx.seed(&format!("{name}/h{k}")), 0.3);
            let psi = random_trig_field(&unit_spinor(&model), n, ctx.seed(&format!("{name}/psi{k}")), 0.3);
            o.merge(pointwise_variation_checks(
                &fx.chart,
                &model,
                &h,
                &psi,
                &pts,
                Fd::default(),
            )?);
        }
        out.extend(o.prefixed(name));
    }
    Ok(out)
}

fn integrals(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let Some(fx) = ctx.fixtures(&["T2_flat"])?.pop() else {
        return Ok(out);
    };
    let model = ctx.model(&fx)?;
    let mut o = Outcome::default();
    for k in 0..DEFORMATIONS {
        let h = random_deformation(2, ctx.seed(&format!("integral/h{k}")), 0.3);
        let psi = random_trig_field(&unit_spinor(&model), 2, ctx.seed(&format!("integral/psi{k}")), 0.3);
        o.merge(integral_variation_checks(
            &fx.chart,
            &model,
            &h,
            &psi,
            ctx.cfg.grid,
            Fd::default(),
            1e-6,
        )?);
    }
    for (k, op) in [
        (0.0, Operator::Dirac),
        (0.0, Operator::DiracSquared),
        (-0.5, Operator::Dirac),
        (-0.5, Operator::DiracSquared),
    ] {
        let phi = random_trig_field(&unit_spinor(&model), 2, ctx.seed("normalized_power/phi"), 0.2);
        let phic = random_trig_field(&unit_spinor(&model), 2, ctx.seed("normalized_power/phic"), 0.5);
        let mut l = normalized_power_check(&fx.chart, &model, &phi, &phic, k, op, ctx.cfg.grid, Fd::default())?;
        let tag = format!("{}.k{}", op_tag(op), k_tag(k));
        for c in &mut l.checks {
            c.name = format!("{}.{tag}", c.name);
        }
        o.extend(l);
    }
    out.extend(o.prefixed("T2_flat"));
    Ok(out)
}

/// Under `η_t = e^t η` the functional of a parallel spinor scales as
/// `e^{nt/2}`, so `dW/dt = (n/2)(b + εν) vol`.
fn functional(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let Some(fx) = ctx.fixtures(&["T2_flat"])?.pop() else {
        return Ok(out);
    };
    let model = ctx.model(&fx)?;
    let psi = constant_field(&unit_spinor(&model));
    let p = WParams {
        a: 1.0,
        b: 0.7,
        eps: 2.0,
        nu: 0.3,
    };
    let h = metric_deformation(&fx.chart, 1.0);
    let n = 2.0;
    let expected = n / 2.0 * (p.b + p.eps * p.nu) * box_volume(&fx.chart);
    let fam = |t: f64| crate::variation::family_chart(&fx.chart, &h, t);
    let d = Fd::default()
        .scalar_derivative(|t| functional_w(&fam(t), &model, &psi, &p, 0.0, Operator::DiracSquared, 16))?;
    out.push(Check::scalar(
        "functional_scaling",
        "dW/dt = (n/2)(b + εν) vol under η_t = e^t η",
        d - expected,
        1e-6,
    ));
    Ok(out.prefixed("T2_flat"))
}

fn op_tag(op: Operator) -> &'static str {
    match op {
        Operator::Dirac => "dirac",
        Operator::DiracSquared => "dirac_squared",
    }
}

fn k_tag(k: f64) -> &'static str {
    if k == 0.0 {
        "0"
    } else {
        "-1/2"
    }
}

/// The unit parallel spinor of the flat torus with `a = 1, b = 0, ε = 1,
/// ν = 0` is a critical point of both functionals for either operator.
fn stationarity(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let Some(fx) = ctx.fixtures(&["T2_flat"])?.pop() else {
        return Ok(out);
    };
    let model = ctx.model(&fx)?;
    let psi = constant_field(&unit_spinor(&model));
    let p = WParams {
        a: 1.0,
        b: 0.0,
        eps: 1.0,
        nu: 0.0,
    };
    let pairs: Vec<(crate::geometry::TensorFn, SpinorFn)> = (0..PERTURBATIONS)
        .map(|j| {
            (
                random_deformation(2, ctx.seed(&format!("stationarity/h{j}")), 0.3),
                random_trig_field(&unit_spinor(&model), 2, ctx.seed(&format!("stationarity/phic{j}")), 0.5),
            )
        })
        .collect();
    for k in [0.0, -0.5] {
        for op in [Operator::Dirac, Operator::DiracSquared] {
            out.push(stationarity_check(
                &fx.chart,
                &model,
                &psi,
                &p,
                k,
                op,
                &pairs,
                STATIONARITY_GRID,
                Fd::default(),
                1e-5,
            )?);
        }
    }
    Ok(out.prefixed("T2_flat"))
}
