//! Numerical transport along `t` with an adaptive Dormand-Prince RK45
//! integrator, as an oracle for the closed-form constructions.
//!
//! With `F̄_{n+1} = B^{-1} ∂_t` parallel along `t`, both constructions solve
//! `∂_t ψ = B(t) (-(√-1)^{3r} ν_1 γ_{n+1} + ½ Tr Θ(t)) ψ`
//! (`ν_1 = 0` for the reduced WP case).

use ode_solvers::{DVector, Dopri5, OutputType, System};

use crate::clifford::{CMat, CliffordModel, Spinor, C64};
use crate::error::{Error, Result};

use super::WarpedSpec;

struct Transport<'a> {
    spec: &'a WarpedSpec,
    gen: CMat,
    /// direction of integration
    sgn: f64,
}

impl System<f64, DVector<f64>> for Transport<'_> {
    fn system(&self, tau: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let t = self.sgn * tau;
        let d = y.len() / 2;
        let psi: Vec<C64> = (0..d).map(|k| C64::new(y[2 * k], y[2 * k + 1])).collect();
        let b = self.spec.b(t);
        let half_tr = 0.5 * self.spec.tr_theta(t);
        let g = self.gen.apply(&psi);
        for k in 0..d {
            let v = (g[k] + psi[k] * half_tr) * (b * self.sgn);
            dy[2 * k] = v.re;
            dy[2 * k + 1] = v.im;
        }
    }
}

/// RK45 solution of the transport ODE from `ψ(0) = ψ_0` to `t`.
pub fn transport(
    spec: &WarpedSpec,
    model: &CliffordModel,
    nu1: f64,
    psi0: &Spinor,
    t: f64,
    rtol: f64,
) -> Result<Spinor> {
    let d = psi0.len();
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let gen = model.gamma(spec.n).scale(-spec.sig().i_3r() * nu1);
    let sys = Transport {
        spec,
        gen,
        sgn: t.signum(),
    };
    let y0 = DVector::from_iterator(2 * d, psi0.0.iter().flat_map(|z| [z.re, z.im]));
    // sparse output: the dense interpolant of ode_solvers 0.6 is off at the endpoint
    let mut solver = Dopri5::from_param(
        sys,
        0.0,
        t.abs(),
        t.abs(),
        y0,
        rtol,
        rtol * 1e-2,
        0.9,
        0.04,
        0.2,
        10.0,
        t.abs(),
        0.0,
        100_000,
        1000,
        OutputType::Sparse,
    );
    solver
        .integrate()
        .map_err(|e| Error::Construction(format!("transport integration failed: {e:?}")))?;
    let (_, ys) = solver.results().get();
    let y = ys
        .last()
        .ok_or_else(|| Error::Construction("empty transport solution".into()))?;
    Ok(Spinor((0..d).map(|k| C64::new(y[2 * k], y[2 * k + 1])).collect()))
}

/// `max_t |ψ_closed(t) - ψ_RK45(t)|` over the given parameter values.
pub fn compare_with_closed_form(
    spec: &WarpedSpec,
    model: &CliffordModel,
    nu1: f64,
    psi0: &Spinor,
    ts: &[f64],
) -> Result<Vec<f64>> {
    ts.iter()
        .map(|&t| {
            let num = transport(spec, model, nu1, psi0, t, 1e-12)?;
            let exact = spec.transport_closed_form(model, nu1, psi0, t);
            Ok(num.sub(&exact).max_abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::unit_spinor;

    #[test]
    fn wk_transport_matches_closed_form() {
        let spec = WarpedSpec::exp(2, 1.0, 1.0).unwrap();
        let model = CliffordModel::build(spec.sig()).unwrap();
        let psi0 = unit_spinor(&model);
        let errs = compare_with_closed_form(&spec, &model, 0.7, &psi0, &[-0.8, -0.2, 0.4, 0.9]).unwrap();
        assert!(errs.iter().all(|&e| e < 1e-9), "{errs:?}");
    }
}
