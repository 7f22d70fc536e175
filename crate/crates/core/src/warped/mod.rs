//! (Y)-warped products `Q = M^n × ℝ` over a flat base:
//! `η = A(t)^2 Σ dx_i^2 + χ B(t)^2 dt^2` with `B = (A^p)_t`.
//!
//! Over a flat base the frame `F̄_i = A^{-1} ∂_i`, `F̄_{n+1} = B^{-1} ∂_t` is
//! parallel along `∂_t`, so spinor transport along `t` reduces to a scalar
//! ODE with the constant matrix `γ_{n+1}`. Both constructions below are
//! solved in closed form; [`oracle`] integrates the same ODE numerically.

pub mod oracle;
pub mod pipeline;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordModel, Signature, Spinor, C64};
use crate::equations::{Check, Outcome};
use crate::error::{Error, Result};
use crate::geometry::{Chart, ScalarFn};
use crate::jet::RJet;
use crate::spincalc::SpinorFn;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "A", rename_all = "lowercase")]
pub enum Warping {
    /// `A = e^{λ t}`
    Exp { lambda: f64 },
    /// `A = (α t + β)^μ`
    Power { alpha: f64, beta: f64, mu: f64 },
}

impl Warping {
    pub fn a_jet(&self, t: &RJet) -> Result<RJet> {
        match *self {
            Warping::Exp { lambda } => Ok(t.scale(lambda).exp()),
            Warping::Power { alpha, beta, mu } => t.scale(alpha).add_scalar(beta).powf(mu),
        }
    }

    /// `(A, A_t, A_tt)` at a real `t`.
    pub fn values(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            Warping::Exp { lambda } => {
                let a = (lambda * t).exp();
                (a, lambda * a, lambda * lambda * a)
            }
            Warping::Power { alpha, beta, mu } => {
                let s = alpha * t + beta;
                (
                    s.powf(mu),
                    alpha * mu * s.powf(mu - 1.0),
                    alpha * alpha * mu * (mu - 1.0) * s.powf(mu - 2.0),
                )
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Warping::Exp { lambda } => format!("A = exp({lambda} t)"),
            Warping::Power { alpha, beta, mu } => format!("A = ({alpha} t + {beta})^{mu}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpedSpec {
    /// base dimension
    pub n: usize,
    pub warping: Warping,
    /// (Y)-factor
    pub p: f64,
    pub chi_last: f64,
    pub t_range: (f64, f64),
}

/// Closed-form frame data at one value of `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    /// `Θ(F̄_i, F̄_j) = θ δ_ij`
    pub theta: f64,
    /// `Ric(F̄_i, F̄_j) = ric_slice δ_ij`
    pub ric_slice: f64,
    /// `Ric(F̄_{n+1}, F̄_{n+1})`
    pub ric_normal: f64,
    pub scal: f64,
}

impl WarpedSpec {
    pub fn new(n: usize, warping: Warping, p: f64, chi_last: f64) -> Result<Self> {
        let s = WarpedSpec {
            n,
            warping,
            p,
            chi_last,
            t_range: (-1.0, 1.0),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn exp(n: usize, p: f64, chi_last: f64) -> Result<Self> {
        Self::new(n, Warping::Exp { lambda: 1.0 }, p, chi_last)
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn sig(&self) -> Signature {
        Signature {
            n: self.n + 1,
            r: usize::from(self.chi_last < 0.0),
        }
    }

    pub fn a(&self, t: f64) -> f64 {
        self.warping.values(t).0
    }

    pub fn b(&self, t: f64) -> f64 {
        let (a, at, _) = self.warping.values(t);
        self.p * a.powf(self.p - 1.0) * at
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidFixture("warped base needs n ≥ 1".into()));
        }
        if self.p == 0.0 {
            return Err(Error::InvalidFixture("(Y)-factor p must be nonzero".into()));
        }
        if self.chi_last.abs() != 1.0 {
            return Err(Error::InvalidFixture(format!(
                "chi_last must be ±1, got {}",
                self.chi_last
            )));
        }
        let (t0, t1) = self.t_range;
        for k in 0..=200 {
            let t = t0 + (t1 - t0) * k as f64 / 200.0;
            let a = self.a(t);
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::NonPositiveWarping(format!("A({t}) = {a}")));
            }
            let b = self.b(t);
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::NonPositiveWarping(format!("B({t}) = {b}")));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        format!(
            "{}^2 (dx1^2 + ... + dx{}^2) {} B^2 dt^2, B = {} A^{} A_t; {}",
            "A",
            self.n,
            if self.chi_last > 0.0 { "+" } else { "-" },
            self.p,
            self.p - 1.0,
            self.warping.describe()
        )
    }

    pub fn chart(&self) -> Result<Chart> {
        self.validate()?;
        let n = self.n;
        let sig = Signature::new(n + 1, usize::from(self.chi_last < 0.0))?;
        let (w, p, chi) = (self.warping, self.p, self.chi_last);
        let metric = Arc::new(move |x: &[RJet]| {
            let t = &x[n];
            let a = w.a_jet(t).expect("A > 0 on the working interval");
            // B = (A^p)_t, differentiated analytically to keep the jet order
            let b = match w {
                Warping::Exp { lambda } => t.scale(p * lambda).exp().scale(p * lambda),
                Warping::Power { alpha, beta, mu } => t
                    .scale(alpha)
                    .add_scalar(beta)
                    .powf(p * mu - 1.0)
                    .expect("base positive")
                    .scale(p * mu * alpha),
            };
            let a2 = &a * &a;
            let b2 = (&b * &b).scale(chi);
            let z = t.zero_like();
            (0..=n)
                .map(|i| {
                    (0..=n)
                        .map(|j| {
                            if i != j {
                                z.clone()
                            } else if i < n {
                                a2.clone()
                            } else {
                                b2.clone()
                            }
                        })
                        .collect()
                })
                .collect()
        });
        let mut domain = vec![(0.0, 2.0 * std::f64::consts::PI); n];
        domain.push(self.t_range);
        Ok(Chart::new(format!("T{n}xR"), sig, domain, metric))
    }

    pub fn closed_form(&self, t: f64) -> ClosedForm {
        let (n, p, chi) = (self.n as f64, self.p, self.chi_last);
        let ap = self.a(t).powf(-p);
        let ap2 = ap * ap;
        ClosedForm {
            theta: -ap / p,
            ric_slice: chi * (p - n) * ap2 / (p * p),
            ric_normal: n * (p - 1.0) * ap2 / (p * p),
            scal: chi * n * (2.0 * p - n - 1.0) * ap2 / (p * p),
        }
    }

    /// `Tr_{g_{M_t}} Θ = -n p^{-1} A^{-p}`
    pub fn tr_theta(&self, t: f64) -> f64 {
        self.n as f64 * self.closed_form(t).theta
    }

    /// The canonical conformal factor `u = -log A`.
    pub fn u_field(&self) -> ScalarFn {
        let (n, w) = (self.n, self.warping);
        Arc::new(move |x: &[RJet]| -w.a_jet(&x[n]).expect("A > 0").ln().expect("A > 0"))
    }

    pub(crate) fn require_p(&self, p: f64, what: &str) -> Result<()> {
        if (self.p - p).abs() > 1e-14 {
            return Err(Error::ParameterMismatch(format!(
                "{what} needs (Y)-factor {p}, fixture has {}",
                self.p
            )));
        }
        Ok(())
    }

    /// `M = -(√-1)^{3r} γ_{n+1}`, which squares to `-1` in both signatures.
    pub fn wk_generator(&self, model: &CliffordModel) -> crate::clifford::CMat {
        model.gamma(self.n).scale(-self.sig().i_3r())
    }

    /// WK-spinor with WK-number `(√-1)^{3r} ν_1` for `p = n/2`, `b = 0`:
    /// `ψ(t) = (A/A_0)^{-n/2} exp(ν_1 (A^p - A_0^p) M) ψ_0`, `A_0 = A(0)`.
    pub fn construct_wk_spinor(&self, model: &CliffordModel, nu1: f64, psi0: &Spinor) -> Result<SpinorFn> {
        self.require_p(self.n as f64 / 2.0, "the WK construction")?;
        if nu1 == 0.0 {
            return Err(Error::NonAdmissible("WK-number must be nonzero".into()));
        }
        self.check_model(model, psi0)?;
        let m_psi0 = Spinor(self.wk_generator(model).apply(&psi0.0));
        let psi0 = psi0.clone();
        let (n, p, w) = (self.n, self.p, self.warping);
        let a0 = self.a(0.0);
        Ok(Arc::new(move |x: &[RJet]| {
            let a = w.a_jet(&x[n]).expect("A > 0");
            let s = a.powf(p).expect("A > 0").add_scalar(-a0.powf(p));
            let th = s.scale(nu1);
            let amp = a.scale(1.0 / a0).powf(-(n as f64) / 2.0).expect("A > 0");
            let c = (&amp * &th.cos()).to_complex();
            let sn = (&amp * &th.sin()).to_complex();
            psi0.0
                .iter()
                .zip(&m_psi0.0)
                .map(|(&v0, &v1)| &c.scale(v0) + &sn.scale(v1))
                .collect()
        }))
    }

    /// Reduced WP-spinor for `p = (n+1)/2`: `ψ(t) = (A/A_0)^{-n/2} ψ_0`.
    pub fn construct_reduced_wp_spinor(&self, model: &CliffordModel, psi0: &Spinor) -> Result<SpinorFn> {
        self.require_p((self.n as f64 + 1.0) / 2.0, "the reduced WP construction")?;
        self.check_model(model, psi0)?;
        let psi0 = psi0.clone();
        let (n, w) = (self.n, self.warping);
        let a0 = self.a(0.0);
        Ok(Arc::new(move |x: &[RJet]| {
            let a = w.a_jet(&x[n]).expect("A > 0");
            let amp = a.scale(1.0 / a0).powf(-(n as f64) / 2.0).expect("A > 0").to_complex();
            psi0.0.iter().map(|&v| amp.scale(v)).collect()
        }))
    }

    /// Values of either construction along `t`, for comparison with the
    /// numerical transport.
    pub fn transport_closed_form(&self, model: &CliffordModel, nu1: f64, psi0: &Spinor, t: f64) -> Spinor {
        let a0 = self.a(0.0);
        let a = self.a(t);
        let amp = (a / a0).powf(-(self.n as f64) / 2.0);
        if nu1 == 0.0 {
            return psi0.scale(C64::new(amp, 0.0));
        }
        let th = nu1 * (a.powf(self.p) - a0.powf(self.p));
        let m_psi0 = Spinor(self.wk_generator(model).apply(&psi0.0));
        psi0.scale(C64::new(amp * th.cos(), 0.0))
            .add(&m_psi0.scale(C64::new(amp * th.sin(), 0.0)))
    }

    fn check_model(&self, model: &CliffordModel, psi0: &Spinor) -> Result<()> {
        if model.sig != self.sig() {
            return Err(Error::SignatureMismatch(format!(
                "model {} vs warped fixture {}",
                model.sig,
                self.sig()
            )));
        }
        if psi0.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: psi0.len(),
            });
        }
        Ok(())
    }
}

/// Closed forms against the generic frame pipeline at the given points.
pub fn check_closed_forms(spec: &WarpedSpec, points: &[Vec<f64>], order: usize, tol: f64) -> Result<Outcome> {
    use rayon::prelude::*;
    let chart = spec.chart()?;
    let n = spec.n;
    let rows: Vec<[f64; 6]> = points
        .par_iter()
        .map(|pt| -> Result<[f64; 6]> {
            let geo = chart.geometry(pt, order)?;
            let cf = spec.closed_form(pt[n]);
            let ric = geo.ric()?;
            let mut r = [0.0f64; 6];
            for i in 0..n {
                for j in 0..n {
                    let d = if i == j { 1.0 } else { 0.0 };
                    r[0] = r[0].max((geo.omega[i][j][n].value() - cf.theta * d).abs());
                    r[1] = r[1].max((ric[i][j].value() - cf.ric_slice * d).abs());
                }
                r[3] = r[3].max(ric[i][n].value().abs()).max(ric[n][i].value().abs());
            }
            r[2] = (ric[n][n].value() - cf.ric_normal).abs();
            r[4] = (geo.scal()?.value() - cf.scal).abs();
            for j in 0..=n {
                for k in 0..=n {
                    r[5] = r[5].max(geo.omega[n][j][k].value().abs());
                }
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let label = format!("{} p={} chi={}", spec.warping.describe(), spec.p, spec.chi_last);
    let mut out = Outcome::default();
    let refs = [
        ("warped.second_fundamental_form", "slice second fundamental form"),
        ("warped.ricci_slice", "warped Ricci, slice block"),
        ("warped.ricci_normal", "warped Ricci, normal direction"),
        ("warped.ricci_mixed", "warped Ricci, mixed block vanishes"),
        ("warped.scalar_curvature", "warped scalar curvature"),
    ];
    for (k, (name, reference)) in refs.iter().enumerate() {
        out.push(Check::vanish(name, &format!("{reference} [{label}]"), col(k), tol));
    }
    out.push(Check::vanish(
        "warped.normal_frame_parallel",
        &format!("frame parallel along the normal direction [{label}]"),
        col(5),
        tol.min(1e-10),
    ));
    Ok(out)
}

/// A spinor of length `(ψ, ψ) = ±1`, built from the first basis vector (or
/// pair of basis vectors) whose length does not vanish.
pub fn unit_spinor(model: &CliffordModel) -> Spinor {
    let d = model.dim();
    let mut candidates: Vec<Spinor> = (0..d)
        .map(|k| {
            let mut s = Spinor::zeros(d);
            s.0[k] = Complex64::new(1.0, 0.0);
            s
        })
        .collect();
    for j in 0..d {
        for k in j + 1..d {
            for c in [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)] {
                let mut s = Spinor::zeros(d);
                s.0[j] = Complex64::new(1.0, 0.0);
                s.0[k] = c;
                candidates.push(s);
            }
        }
    }
    for s in candidates {
        let len = model.re_inner(&s, &s);
        if len.abs() > 1e-6 {
            return s.scale(Complex64::new(len.abs().powf(-0.5), 0.0));
        }
    }
    unreachable!("the spinor pairing is nondegenerate")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_warping_rejected() {
        let e = WarpedSpec::new(2, Warping::Exp { lambda: 0.0 }, 1.0, 1.0);
        assert!(matches!(e, Err(Error::NonPositiveWarping(_))));
    }

    #[test]
    fn exp_warping_with_unit_factor() {
        let s = WarpedSpec::exp(2, 1.0, 1.0).unwrap();
        for t in [-0.5, 0.0, 0.7] {
            assert!((s.b(t) - t.exp()).abs() < 1e-14);
        }
        let chart = s.chart().unwrap();
        let geo = chart.geometry(&[0.1, 0.2, 0.3], 1).unwrap();
        assert!((geo.g[2][2].value() - (0.6f64).exp()).abs() < 1e-13);
        assert!(geo.orthonormality_residual() < 1e-12);
    }

    #[test]
    fn scalar_curvature_vanishes_for_critical_factor() {
        let s = WarpedSpec::exp(2, 1.5, 1.0).unwrap();
        assert_eq!(s.closed_form(0.3).scal, 0.0);
        let s = WarpedSpec::exp(2, 1.0, 1.0).unwrap();
        let t: f64 = 0.4;
        assert!((s.closed_form(t).scal + 2.0 * (-2.0 * t).exp()).abs() < 1e-14);
    }

    #[test]
    fn wrong_factor_is_rejected() {
        let s = WarpedSpec::exp(2, 1.5, 1.0).unwrap();
        let model = CliffordModel::build(s.sig()).unwrap();
        let psi0 = unit_spinor(&model);
        assert!(matches!(
            s.construct_wk_spinor(&model, 1.0, &psi0),
            Err(Error::ParameterMismatch(_))
        ));
        let s = WarpedSpec::exp(2, 1.0, 1.0).unwrap();
        assert!(matches!(
            s.construct_wk_spinor(&model, 0.0, &psi0),
            Err(Error::NonAdmissible(_))
        ));
    }
}
