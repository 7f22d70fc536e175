//! Conformal transformation laws, weakly T-parallel spinors and their
//! transport to CL-Einstein-Dirac solutions.

use crate::conformal::{
    check_conformal_laws, check_curvature_laws, conformal_chart, transported_cled2_check, wp_transport,
};
use crate::equations::{metric_tensor, residual_weakly_t_parallel, Outcome, Setting};
use crate::error::Result;
use crate::solutions::{conformal_factors, parallel_unit_spinor};
use crate::spincalc::random_polynomial_field;

use super::Ctx;

pub(super) fn run(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.extend(laws(ctx)?);
    out.extend(flat_transport(ctx)?);
    Ok(out)
}

/// Both paths of every conformal law, for each fixture and factor.
fn laws(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    for fx in ctx.fixtures(&["T3_flat", "S2", "T2xR_exp"])? {
        let model = ctx.model(&fx)?;
        let pts = ctx.points(&fx, "conformal");
        let center: Vec<f64> = fx.chart.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let mut o = Outcome::default();
        for (k, (label, u)) in conformal_factors(&fx.chart).into_iter().enumerate() {
            let psi = random_polynomial_field(
                model.dim(),
                &center,
                ctx.seed(&format!("{}/conformal{k}", fx.spec.name)),
                0.5,
            );
            let mut f = check_conformal_laws(&fx.chart, &model, &u, &psi, &pts, ctx.order(3))?;
            f.extend(check_curvature_laws(&fx.chart, &model, &u, &pts, ctx.order(2))?);
            let worst = f.checks.iter().map(|c| c.max_abs_residual).fold(0.0, f64::max);
            f.note(
                &format!("u{k}.worst"),
                format!("largest residual for u = {label}"),
                worst,
            );
            o.merge(f);
        }
        out.extend(o.prefixed(&fx.spec.name));
    }
    Ok(out)
}

/// The unit parallel spinor of flat `T^3` pulled back to `e^u η`: weakly
/// T-parallel with `β = η`, a WP-spinor under the transport with `c = 0`,
/// and a CL-Einstein-Dirac solution of type II.
fn flat_transport(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let Some(fx) = ctx.fixtures(&["T3_flat"])?.pop() else {
        return Ok(out);
    };
    let model = ctx.model(&fx)?;
    let pts = ctx.points(&fx, "transport");
    let psi = parallel_unit_spinor(&model);
    let order = ctx.order(3);
    let factors = conformal_factors(&fx.chart);

    // du is nowhere zero for the second factor
    let (_, u) = &factors[1];
    let conf = conformal_chart(&fx.chart, u);
    let s = Setting::new(&conf, &model, &pts, order)?;
    out.extend(residual_weakly_t_parallel(&s, &psi, u, &metric_tensor())?.prefixed("weak_parallel"));
    let (transport, _) = wp_transport(&fx.chart, &model, u, &psi, 1.0, 0.0, 0.0, &pts, order)?;
    out.extend(transport);
    out.extend(transported_cled2_check(&s, &psi, u, 1.0, 0.0)?.prefixed("transported"));

    // on a closed chart the characteristic function is not constant
    let (label, u) = &factors[0];
    let conf = conformal_chart(&fx.chart, u);
    let s = Setting::new(&conf, &model, &pts, order)?;
    let cled = transported_cled2_check(&s, &psi, u, 1.0, 0.0)?;
    let spread = cled.diagnostic("cled2.f_spread").map_or(f64::NAN, |d| d.value);
    out.note(
        "closed.f2_spread",
        format!("variation of f_2 over the points for the periodic factor u = {label}"),
        spread,
    );
    out.note(
        "closed.cled2_worst",
        "largest CL-ED-II residual for the periodic factor",
        cled.checks.iter().map(|c| c.max_abs_residual).fold(0.0, f64::max),
    );
    Ok(out.prefixed("T3_flat"))
}
