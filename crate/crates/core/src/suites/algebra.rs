//! Clifford identities, frame geometry against the coordinate oracle, and
//! the spinor operators against the Schrödinger-Lichnerowicz formula.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clifford::{spinor_scale, spinor_sub, CliffordModel, Signature, Spinor, C64, SUPPORTED_SIGNATURES};
use crate::equations::{Check, Outcome, Setting};
use crate::error::Result;
use crate::fixtures::{Fixture, FixtureKind};
use crate::geometry::coordinate;
use crate::spincalc::{random_polynomial_field, random_trig_field, spinor_max, tensor_max, SpinCalc};
use crate::warped::unit_spinor;

use super::Ctx;

const DRAWS: usize = 100;

fn vector_action(model: &CliffordModel, v: &[f64], s: &Spinor) -> Spinor {
    model.clifford_mul(v, s).expect("matching dimensions")
}

fn eta(sig: Signature, x: &[f64], y: &[f64]) -> f64 {
    (0..sig.n).map(|i| sig.chi(i) * x[i] * y[i]).sum()
}

pub(super) fn clifford(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    for (n, r) in SUPPORTED_SIGNATURES {
        let sig = Signature::new(n, r)?;
        let model = CliffordModel::build(sig)?;
        let d = model.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(&format!("clifford/{n},{r}")));
        let sr = sig.sign_r();
        let mut rows = Vec::with_capacity(DRAWS);
        for _ in 0..DRAWS {
            let phi = Spinor::random(d, &mut rng);
            let psi = Spinor::random(d, &mut rng);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut adjoint: f64 = 0.0;
            for i in 0..n {
                let a = model.inner(&model.apply_gamma(i, &phi), &psi);
                let b = model.inner(&phi, &model.apply_gamma(i, &psi));
                adjoint = adjoint.max((a + b * sr).norm());
            }
            let xpsi = vector_action(&model, &x, &psi);
            let ypsi = vector_action(&model, &y, &psi);
            let len = model.re_inner(&psi, &psi);
            let real_part = model.re_inner(&xpsi.scale(sig.i_r()), &psi).abs();
            let inner = (model.re_inner(&xpsi, &ypsi) - sr * eta(sig, &x, &y) * len).abs();
            let xy = vector_action(&model, &x, &ypsi);
            let double = (model.re_inner(&xy, &psi) + eta(sig, &x, &y) * len).abs();
            let xx = vector_action(&model, &x, &xpsi);
            let square = xx.add(&psi.scale(C64::new(eta(sig, &x, &x), 0.0))).max_abs();
            let (pk, sigma) = model.power_spinor(&phi, -0.5)?;
            let unit = (sigma * model.re_inner(&pk, &pk) - 1.0).abs();
            rows.push([adjoint, real_part, inner, double, square, unit]);
        }
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
        let mut o = Outcome::default();
        o.push(Check::scalar(
            "relation",
            "γ_i γ_j + γ_j γ_i = -2 χ(i) δ_ij",
            model.clifford_relation_residual(),
            1e-12,
        ));
        o.push(Check::vanish(
            "adjoint",
            "⟨X·φ, ψ⟩ + (-1)^r ⟨φ, X·ψ⟩ = 0",
            col(0),
            1e-12,
        ));
        o.push(Check::vanish("real_part", "((√-1)^r X·ψ, ψ) = 0", col(1), 1e-12));
        o.push(Check::vanish(
            "inner_product",
            "(X·ψ, Y·ψ) = (-1)^r η(X,Y) (ψ,ψ)",
            col(2),
            1e-12,
        ));
        o.push(Check::vanish(
            "double_product",
            "(X·Y·ψ, ψ) = -η(X,Y) (ψ,ψ)",
            col(3),
            1e-12,
        ));
        o.push(Check::vanish("square", "X·X·ψ = -η(X,X) ψ", col(4), 1e-12));
        o.push(Check::vanish(
            "power_length",
            "(σφ^k, φ^k) = 1 for k = -1/2",
            col(5),
            1e-12,
        ));
        // the pairing matrix is a phase times a product of unitary gammas
        o.push(Check::scalar(
            "pairing_condition",
            "cond(adj) - 1 = 0 for the unitary pairing matrix",
            model.adj_condition() - 1.0,
            1e-12,
        ));
        out.extend(o.prefixed(&format!("n{n}r{r}")));
    }
    Ok(out)
}

const GEOMETRY_FIXTURES: [&str; 11] = [
    "T2_flat",
    "T21_flat",
    "S2",
    "S3",
    "S3_hopf",
    "H2",
    "H3",
    "Mink4",
    "T2xR_exp",
    "T3xR_wk_lorentz",
    "T2xR_pow",
];

/// Scalar curvature known in closed form at a point.
fn known_scalar(fx: &Fixture, p: &[f64]) -> Option<f64> {
    let n = fx.spec.n as f64;
    match fx.spec.kind {
        FixtureKind::Torus | FixtureKind::Euclidean | FixtureKind::Minkowski => Some(0.0),
        FixtureKind::Sphere => {
            let r = fx.spec.params.radius.unwrap_or(1.0);
            Some(n * (n - 1.0) / (r * r))
        }
        FixtureKind::Hyperbolic => Some(-n * (n - 1.0)),
        FixtureKind::Warped => fx.warped.as_ref().map(|w| w.closed_form(p[w.n]).scal),
    }
}

pub(super) fn geometry(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    for fx in ctx.fixtures(&GEOMETRY_FIXTURES)? {
        let pts = ctx.points(&fx, "geometry");
        let order = ctx.order(2);
        let rows: Vec<[f64; 6]> = pts
            .par_iter()
            .map(|p| -> Result<[f64; 6]> {
                let geo = fx.chart.geometry(p, order)?;
                let n = geo.n();
                let orc = coordinate::oracle(&geo)?;
                let mut om: f64 = 0.0;
                let mut ric: f64 = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            om = om.max((geo.omega[i][j][k].value() - orc.omega[i][j][k]).abs());
                        }
                        ric = ric.max((geo.ric()?[i][j].value() - orc.ric[i][j]).abs());
                    }
                }
                let s = geo.scal()?.value();
                let known = known_scalar(&fx, p).map_or(0.0, |k| (s - k).abs());
                Ok([
                    geo.orthonormality_residual(),
                    geo.metricity_residual(),
                    om,
                    ric,
                    (s - orc.scal).abs(),
                    known,
                ])
            })
            .collect::<Result<_>>()?;
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
        let mut o = Outcome::default();
        o.push(Check::vanish(
            "orthonormal_frame",
            "η(E_i, E_j) = χ(i) δ_ij",
            col(0),
            1e-12,
        ));
        o.push(Check::vanish("metricity", "ω_ijk + ω_ikj = 0", col(1), 1e-12));
        o.push(Check::vanish(
            "connection_oracle",
            "frame connection against Christoffel symbols",
            col(2),
            1e-8,
        ));
        o.push(Check::vanish(
            "ricci_oracle",
            "frame Ricci tensor against the coordinate Riemann tensor",
            col(3),
            1e-8,
        ));
        o.push(Check::vanish(
            "scalar_oracle",
            "frame scalar curvature against the coordinate oracle",
            col(4),
            1e-8,
        ));
        o.push(Check::vanish(
            "scalar_closed_form",
            "scalar curvature against its closed form",
            col(5),
            1e-8,
        ));
        out.extend(o.prefixed(&fx.spec.name));
    }
    Ok(out)
}

const LICHNEROWICZ_FIXTURES: [&str; 8] = ["T2_flat", "S2", "S3", "H2", "H3", "Mink4", "T2xR_exp", "T3xR_wk"];
const FIELDS: u64 = 10;

pub(super) fn spincalc(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    for fx in ctx.fixtures(&LICHNEROWICZ_FIXTURES)? {
        let model = ctx.model(&fx)?;
        let pts = ctx.points(&fx, "spincalc");
        let center: Vec<f64> = fx.chart.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let s = Setting::new(&fx.chart, &model, &pts, ctx.order(2))?;
        let mut o = Outcome::default();
        for k in 0..FIELDS {
            let phi = random_polynomial_field(model.dim(), &center, ctx.seed(&format!("{}/phi{k}", fx.spec.name)), 0.5);
            let psi = random_polynomial_field(model.dim(), &center, ctx.seed(&format!("{}/psi{k}", fx.spec.name)), 0.5);
            let rows = s.map(|sc| {
                let p = sc.eval(&phi)?;
                let q = sc.eval(&psi)?;
                let d2 = sc.dirac_pow(&p, 2);
                let lap = sc.laplacian(&p);
                let scal = sc.geo.scal()?.value();
                let sl = spinor_sub(&spinor_sub(&d2, &lap), &spinor_scale(&p, C64::new(scal / 4.0, 0.0)));
                let pq = sc.pair(&p, &q);
                let mut compat: f64 = 0.0;
                for i in 0..sc.n() {
                    let lhs = sc.geo.dir(i, &pq);
                    let rhs = &sc.pair(&sc.cov(&p, i), &q) + &sc.pair(&p, &sc.cov(&q, i));
                    compat = compat.max((lhs.value() - rhs.value()).abs());
                }
                let sym = |t: &crate::linalg::JetMat<f64>| {
                    let mut w: f64 = 0.0;
                    for i in 0..t.len() {
                        for j in 0..t.len() {
                            w = w.max((t[i][j].value() - t[j][i].value()).abs());
                        }
                    }
                    w
                };
                let t1 = sc.t1(&p, 1.0);
                let t2 = sc.t2(&p, 1.0);
                Ok([spinor_max(&sl), compat, sym(&t1).max(sym(&t2)), tensor_max(&t1)])
            })?;
            let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
            let mut f = Outcome::default();
            f.push(Check::vanish("lichnerowicz", "D²ψ = Δψ + S/4 ψ", col(0), 1e-8));
            f.push(Check::vanish(
                "metric_compatibility",
                "E_i(φ,ψ) = (∇_i φ, ψ) + (φ, ∇_i ψ)",
                col(1),
                1e-10,
            ));
            f.push(Check::vanish(
                "energy_momentum_symmetry",
                "T_1 and T_2 are symmetric",
                col(2),
                1e-12,
            ));
            o.merge(f);
        }
        out.extend(o.prefixed(&fx.spec.name));
    }
    if ctx.wants("T2_flat") {
        out.extend(l2_symmetry(ctx)?);
    }
    Ok(out)
}

/// `∫ ((√-1)^r Dφ, ψ) = ∫ (φ, (√-1)^r Dψ)` on the flat torus.
fn l2_symmetry(ctx: &Ctx) -> Result<Outcome> {
    let fx = ctx.registry.build("T2_flat")?;
    let model = ctx.model(&fx)?;
    let base = unit_spinor(&model);
    let ir = model.sig.i_r();
    let (pts, cell) = fx.chart.grid(ctx.cfg.grid);
    let mut res = Vec::new();
    for k in 0..3u64 {
        let phi = random_trig_field(&base, 2, ctx.seed(&format!("l2/phi{k}")), 0.4);
        let psi = random_trig_field(&base, 2, ctx.seed(&format!("l2/psi{k}")), 0.4);
        let vals: Vec<f64> = pts
            .par_iter()
            .map(|p| -> Result<f64> {
                let geo = fx.chart.geometry(p, 1)?;
                let sc = SpinCalc::new(&geo, &model)?;
                let a = sc.eval(&phi)?;
                let b = sc.eval(&psi)?;
                let l = sc.pair(&spinor_scale(&sc.dirac(&a), ir), &b).value();
                let r = sc.pair(&a, &spinor_scale(&sc.dirac(&b), ir)).value();
                Ok((l - r) * geo.vol.value())
            })
            .collect::<Result<_>>()?;
        res.push(vals.iter().sum::<f64>() * cell);
    }
    let mut o = Outcome::default();
    o.push(Check::vanish(
        "l2_symmetry",
        "(√-1)^r D is L²-symmetric on a closed chart",
        res,
        1e-6,
    ));
    Ok(o.prefixed("T2_flat"))
}
