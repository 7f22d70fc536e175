//! Closed-form solutions and witnesses used by the suites.

use std::sync::Arc;

use crate::clifford::{CliffordModel, Spinor, C64};
use crate::error::{Error, Result};
use crate::geometry::{Chart, ScalarFn};
use crate::jet::RJet;
use crate::spincalc::{constant_field, scaled_field, SpinorFn};
use crate::warped::unit_spinor;

/// Imaginary Killing spinor `∇_X ψ = -√-1 (ν_1/n) X·ψ` on the upper
/// half-space `H^n`, `ψ = x_n^{-1/2} ψ_0` with `γ_n ψ_0 = -√-1 ψ_0`.
/// Returns the field and `ν_1 = n/2`.
pub fn imaginary_killing_spinor(model: &CliffordModel) -> Result<(SpinorFn, f64)> {
    let n = model.n();
    if model.sig.r != 0 {
        return Err(Error::SignatureMismatch(format!(
            "hyperbolic space needs r = 0, got {}",
            model.sig
        )));
    }
    let d = model.dim();
    let g = model.gamma(n - 1);
    // (1 + √-1 γ_n)/2 projects onto the -√-1 eigenspace
    let psi0 = (0..d)
        .map(|k| {
            let mut e = Spinor::zeros(d);
            e.0[k] = C64::new(1.0, 0.0);
            let ge = Spinor(g.apply(&e.0));
            e.add(&ge.scale(C64::new(0.0, 1.0))).scale(C64::new(0.5, 0.0))
        })
        .find(|v| v.max_abs() > 1e-8)
        .ok_or_else(|| Error::Construction("γ_n has no -√-1 eigenvector".into()))?;
    let nrm = model.re_inner(&psi0, &psi0).abs().sqrt();
    let psi0 = psi0.scale(C64::new(1.0 / nrm, 0.0));
    let f: SpinorFn = Arc::new(move |x: &[RJet]| {
        let amp = x[n - 1].powf(-0.5).expect("x_n > 0").to_complex();
        psi0.0.iter().map(|&c| amp.scale(c)).collect()
    });
    Ok((f, n as f64 / 2.0))
}

/// Unit spinor, constant in the left-invariant frame of `S^3`; it is a
/// real Killing spinor with Killing number `-1/2`.
pub fn s3_killing_spinor(model: &CliffordModel) -> SpinorFn {
    constant_field(&unit_spinor(model))
}

/// Unit parallel spinor of a flat chart, which is weakly T-parallel with
/// `β = id` for the conformal metric `e^u η`.
pub fn parallel_unit_spinor(model: &CliffordModel) -> SpinorFn {
    constant_field(&unit_spinor(model))
}

/// Parallel spinor scaled to length `(ψ,ψ) = 4`; on `e^u η` it is an
/// eigenspinor of `D^2` of constant but non-unit length.
pub fn scaled_parallel_spinor(model: &CliffordModel) -> SpinorFn {
    scaled_field(&parallel_unit_spinor(model), C64::new(2.0, 0.0))
}

/// Three conformal factors on a chart of dimension `n`, in the first and
/// last coordinates.
pub fn conformal_factors(chart: &Chart) -> Vec<(&'static str, ScalarFn)> {
    let l = chart.dim() - 1;
    vec![
        (
            "0.3 sin(x_1 + x_n)",
            Arc::new(move |x: &[RJet]| (&x[0] + &x[l]).sin().scale(0.3)) as ScalarFn,
        ),
        (
            "0.2 cos(x_1) + 0.1 x_n",
            Arc::new(move |x: &[RJet]| &x[0].cos().scale(0.2) + &x[l].scale(0.1)) as ScalarFn,
        ),
        (
            "0.15 x_1 x_n + 0.1 sin(x_n)",
            Arc::new(move |x: &[RJet]| &(&x[0] * &x[l]).scale(0.15) + &x[l].sin().scale(0.1)) as ScalarFn,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{spinor_scale, spinor_sub};
    use crate::fixtures;
    use crate::spincalc::{spinor_max, SpinCalc};

    #[test]
    fn killing_spinors() {
        let chart = fixtures::hyperbolic(3).unwrap();
        let model = CliffordModel::build(chart.sig).unwrap();
        let (f, nu1) = imaginary_killing_spinor(&model).unwrap();
        assert_eq!(nu1, 1.5);
        let geo = chart.geometry(&[0.2, -0.4, 1.3], 1).unwrap();
        let sc = SpinCalc::new(&geo, &model).unwrap();
        let ps = sc.eval(&f).unwrap();
        for i in 0..3 {
            let rhs = spinor_scale(&sc.gamma(i, &ps), C64::new(0.0, -nu1 / 3.0));
            assert!(spinor_max(&spinor_sub(&sc.cov(&ps, i), &rhs)) < 1e-13);
        }

        let chart = fixtures::sphere3_left_invariant().unwrap();
        let model = CliffordModel::build(chart.sig).unwrap();
        let f = s3_killing_spinor(&model);
        let geo = chart.geometry(&[0.7, 0.3, 1.1], 1).unwrap();
        let sc = SpinCalc::new(&geo, &model).unwrap();
        let ps = sc.eval(&f).unwrap();
        for i in 0..3 {
            let rhs = spinor_scale(&sc.gamma(i, &ps), C64::new(-0.5, 0.0));
            assert!(spinor_max(&spinor_sub(&sc.cov(&ps, i), &rhs)) < 1e-13);
        }
    }
}
