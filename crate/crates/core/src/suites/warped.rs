//! Warped products: closed-form curvature, the WK-spinor construction and
//! the numerical transport oracle.

use crate::clifford::CliffordModel;
use crate::equations::{residual_ed1, residual_wk, Check, EdParams, Outcome, Setting};
use crate::error::Result;
use crate::fixtures::Fixture;
use crate::warped::oracle::compare_with_closed_form;
use crate::warped::{check_closed_forms, unit_spinor, WarpedSpec};

use super::equations::ed1_implies_ed2;
use super::Ctx;

const WK_NUMBERS: [f64; 3] = [0.5, 1.0, 2.0];
const WK_FIXTURES: [&str; 5] = ["T2xR_wk", "T2xR_wk_lorentz", "T3xR_wk", "T3xR_wk_lorentz", "T2xR_pow"];

pub(super) fn run(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.extend(closed_forms(ctx)?);
    for fx in ctx.fixtures(&WK_FIXTURES)? {
        out.extend(wk(ctx, &fx)?);
    }
    Ok(out)
}

fn chi_tag(chi: f64) -> &'static str {
    if chi > 0.0 {
        "riem"
    } else {
        "lor"
    }
}

/// Every `(n, χ(n+1), p)` with `A = e^t`, plus the registry's warped fixtures.
fn closed_forms(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let order = ctx.order(2).min(3);
    if ctx.cfg.fixture.is_none() {
        for n in [2usize, 3] {
            let nf = n as f64;
            let mut ps = vec![1.0, nf / 2.0, (nf + 1.0) / 2.0, 2.0];
            ps.sort_by(f64::total_cmp);
            ps.dedup();
            for chi in [1.0, -1.0] {
                for &p in &ps {
                    let spec = WarpedSpec::exp(n, p, chi)?;
                    let label = format!("exp_n{n}_p{p}_{}", chi_tag(chi));
                    let pts = spec.chart()?.sample_points(ctx.cfg.points, ctx.seed(&label));
                    out.extend(check_closed_forms(&spec, &pts, order, 1e-8)?.prefixed(&label));
                }
            }
        }
    }
    let names: Vec<&str> = ctx.registry.names().into_iter().filter(|n| n.contains("xR_")).collect();
    for fx in ctx.fixtures(&names)? {
        let Some(spec) = &fx.warped else { continue };
        let pts = ctx.points(&fx, "closed_form");
        out.extend(check_closed_forms(spec, &pts, order, 1e-8)?.prefixed(&fx.spec.name));
    }
    Ok(out)
}

/// The WK-spinor for each WK number: the WK equation with `b = 0`, the
/// constant ratio of the length to `a(m-2)S`, the ED-I system it implies,
/// ED-II in turn, and the transport ODE against the closed form.
fn wk(ctx: &Ctx, fx: &Fixture) -> Result<Outcome> {
    let mut out = Outcome::default();
    let Some(spec) = &fx.warped else { return Ok(out) };
    if spec.p != spec.n as f64 / 2.0 {
        return Ok(out);
    }
    let model = CliffordModel::build(spec.sig())?;
    let psi0 = unit_spinor(&model);
    let pts = ctx.points(fx, "wk");
    let s = Setting::new(&fx.chart, &model, &pts, ctx.order(2))?;
    let m = spec.dim() as f64;
    let a = 1.0;
    for nu1 in WK_NUMBERS {
        let psi = spec.construct_wk_spinor(&model, nu1, &psi0)?;
        let mut o = residual_wk(&s, &psi, a, 0.0, nu1)?;
        for c in &mut o.checks {
            if c.name == "wk.equation" {
                *c = c.clone().with_tol(1e-7);
            }
        }
        // ε = -a(m-2)S / (ν_1 (ψ,ψ)), constant because the ratio is
        let p0 = &pts[0];
        let geo = fx.chart.geometry(p0, 2)?;
        let sc = crate::spincalc::SpinCalc::new(&geo, &model)?;
        let len = sc.length(&sc.eval(&psi)?).value();
        let eps = -a * (m - 2.0) * geo.scal()?.value() / (nu1 * len);
        let ed = EdParams {
            a,
            b: 0.0,
            eps,
            nu: nu1,
        };
        let mut e1 = residual_ed1(&s, &psi, &ed)?;
        e1.override_tol(1e-7);
        o.extend(e1);
        o.extend(ed1_implies_ed2(&s, &psi, &ed)?);
        o.note("ed1.eps", "coupling ε of the implied ED-I system", eps);

        let (lo, hi) = spec.t_range;
        let ts: Vec<f64> = (0..5).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / 5.0).collect();
        let errs = compare_with_closed_form(spec, &model, nu1, &psi0, &ts)?;
        o.push(Check::vanish(
            "transport_ode",
            "normal transport ODE (RK45) against the closed form",
            errs,
            1e-9,
        ));
        out.extend(o.prefixed(&format!("nu{nu1}")));
    }
    out.note("warping", spec.warping.describe(), spec.p);
    Ok(out.prefixed(&fx.spec.name))
}
