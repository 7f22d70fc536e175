//! Spinor calculus in the frame: spin connection, Dirac operator and its
//! powers, the spinor Laplacian and the energy-momentum tensors.
//!
//! `∇_{E_i} ψ = E_i(ψ) + ¼ Σ_{j,k} χ(j) χ(k) ω_ijk E_j·E_k·ψ` and
//! `D ψ = Σ_i χ(i) E_i·∇_{E_i} ψ`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{spinor_add, spinor_scale, CliffordModel, Spinor, C64};
use crate::error::{Error, Result};
use crate::geometry::PointGeometry;
use crate::jet::{CJet, RJet};
use crate::linalg::JetMat;

/// Spinor field in frame components, as a function of the coordinate jets.
pub type SpinorFn = Arc<dyn Fn(&[RJet]) -> Vec<CJet> + Send + Sync>;

/// Spinor operators at one point.
pub struct SpinCalc<'a> {
    pub geo: &'a PointGeometry,
    pub model: &'a CliffordModel,
    /// `conn[i][a][b]`: matrix of `¼ Σ χχ ω_ijk γ_j γ_k`
    conn: Vec<Vec<Vec<CJet>>>,
}

impl<'a> SpinCalc<'a> {
    pub fn new(geo: &'a PointGeometry, model: &'a CliffordModel) -> Result<Self> {
        if geo.sig != model.sig {
            return Err(Error::SignatureMismatch(format!(
                "geometry {} vs clifford model {}",
                geo.sig, model.sig
            )));
        }
        let n = geo.n();
        let d = model.dim();
        let prods: Vec<Vec<_>> = (0..n)
            .map(|j| (0..n).map(|k| model.gamma(j).mul(model.gamma(k))).collect())
            .collect();
        let zero = geo.omega[0][0][0].to_complex().zero_like();
        let conn = (0..n)
            .map(|i| {
                let om: Vec<Vec<CJet>> = (0..n)
                    .map(|j| (0..n).map(|k| geo.omega[i][j][k].to_complex()).collect())
                    .collect();
                (0..d)
                    .map(|a| {
                        (0..d)
                            .map(|b| {
                                let mut acc = zero.clone();
                                for j in 0..n {
                                    for k in 0..n {
                                        if j == k {
                                            continue;
                                        }
                                        let c = prods[j][k].at(a, b);
                                        if c != Complex64::new(0.0, 0.0) {
                                            let w = 0.25 * geo.chi[j] * geo.chi[k];
                                            acc += &om[j][k].scale(c * w);
                                        }
                                    }
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(SpinCalc { geo, model, conn })
    }

    pub fn n(&self) -> usize {
        self.geo.n()
    }

    /// Evaluates a field at this point.
    pub fn eval(&self, f: &SpinorFn) -> Result<Vec<CJet>> {
        let v = f(&self.geo.x);
        if v.len() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                found: v.len(),
            });
        }
        Ok(v)
    }

    /// `∇_{E_i} ψ`
    pub fn cov(&self, psi: &[CJet], i: usize) -> Vec<CJet> {
        let c = &self.conn[i];
        (0..psi.len())
            .map(|a| {
                let mut acc = self.geo.dir_c(i, &psi[a]);
                for (b, pb) in psi.iter().enumerate() {
                    acc += &(&c[a][b] * pb);
                }
                acc
            })
            .collect()
    }

    pub fn cov_all(&self, psi: &[CJet]) -> Vec<Vec<CJet>> {
        (0..self.n()).map(|i| self.cov(psi, i)).collect()
    }

    /// `∇_X ψ` for `X = Σ v^i E_i`.
    pub fn cov_along(&self, psi: &[CJet], v: &[RJet]) -> Vec<CJet> {
        let covs = self.cov_all(psi);
        combine(&covs, v)
    }

    pub fn gamma(&self, i: usize, psi: &[CJet]) -> Vec<CJet> {
        self.model.gamma_jet(i, psi)
    }

    /// `X·ψ` for frame components `v` of `X`.
    pub fn clifford(&self, v: &[RJet], psi: &[CJet]) -> Vec<CJet> {
        self.model.clifford_mul_jet(v, psi)
    }

    pub fn dirac_from_cov(&self, covs: &[Vec<CJet>]) -> Vec<CJet> {
        let mut out: Vec<CJet> = covs[0].iter().map(|x| x.zero_like()).collect();
        for (i, c) in covs.iter().enumerate() {
            let g = self.gamma(i, c);
            for (o, gi) in out.iter_mut().zip(&g) {
                *o += &gi.scale_real(self.geo.chi[i]);
            }
        }
        out
    }

    pub fn dirac(&self, psi: &[CJet]) -> Vec<CJet> {
        self.dirac_from_cov(&self.cov_all(psi))
    }

    /// `D^k ψ`, each application lowering the jet order by one.
    pub fn dirac_pow(&self, psi: &[CJet], k: usize) -> Vec<CJet> {
        let mut out = psi.to_vec();
        for _ in 0..k {
            out = self.dirac(&out);
        }
        out
    }

    /// `Δψ = -Σ_i χ(i) (∇_{E_i} ∇_{E_i} ψ - ∇_{∇_{E_i} E_i} ψ)`
    pub fn laplacian(&self, psi: &[CJet]) -> Vec<CJet> {
        let n = self.n();
        let covs = self.cov_all(psi);
        let mut out: Vec<CJet> = psi.iter().map(|x| x.zero_like()).collect();
        for i in 0..n {
            let second = self.cov(&covs[i], i);
            for (a, o) in out.iter_mut().enumerate() {
                let mut term = second[a].clone();
                for k in 0..n {
                    let w = self.geo.omega[i][i][k].scale(self.geo.chi[k]).to_complex();
                    term -= &(&w * &covs[k][a]);
                }
                *o -= &term.scale_real(self.geo.chi[i]);
            }
        }
        out
    }

    /// `(φ, ψ) = Re ⟨φ, ψ⟩`
    pub fn pair(&self, phi: &[CJet], psi: &[CJet]) -> RJet {
        self.model.re_inner_jet(phi, psi)
    }

    pub fn length(&self, psi: &[CJet]) -> RJet {
        self.pair(psi, psi)
    }

    /// `{E_a·∇_b ψ + E_b·∇_a ψ}` for all index pairs.
    fn sym_gamma_cov(&self, covs: &[Vec<CJet>]) -> Vec<Vec<Vec<CJet>>> {
        let n = self.n();
        let gc: Vec<Vec<Vec<CJet>>> = (0..n)
            .map(|a| (0..n).map(|b| self.gamma(a, &covs[b])).collect())
            .collect();
        (0..n)
            .map(|a| (0..n).map(|b| spinor_add(&gc[a][b], &gc[b][a])).collect())
            .collect()
    }

    /// `T_1(E_a, E_b) = (σ (√-1)^r {E_a·∇_b ψ + E_b·∇_a ψ}, ψ)`
    pub fn t1(&self, psi: &[CJet], sigma: f64) -> JetMat<f64> {
        let s = self.sym_gamma_cov(&self.cov_all(psi));
        let c = self.model.sig.i_r() * sigma;
        let n = self.n();
        (0..n)
            .map(|a| (0..n).map(|b| self.pair(&spinor_scale(&s[a][b], c), psi)).collect())
            .collect()
    }

    /// `T_2(E_a, E_b) = σ(E_a·∇_b Dψ + E_b·∇_a Dψ, ψ)
    ///                 + σ(-1)^r (E_a·∇_b ψ + E_b·∇_a ψ, Dψ)`
    pub fn t2(&self, psi: &[CJet], sigma: f64) -> JetMat<f64> {
        let covs = self.cov_all(psi);
        let dpsi = self.dirac_from_cov(&covs);
        let s1 = self.sym_gamma_cov(&covs);
        let s2 = self.sym_gamma_cov(&self.cov_all(&dpsi));
        let sr = self.model.sig.sign_r();
        let n = self.n();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let x = self.pair(&s2[a][b], psi);
                        let y = self.pair(&s1[a][b], &dpsi);
                        (&x + &y.scale(sr)).scale(sigma)
                    })
                    .collect()
            })
            .collect()
    }
}

/// `Σ_i v^i s_i` over a family of spinors.
pub fn combine(family: &[Vec<CJet>], v: &[RJet]) -> Vec<CJet> {
    let mut out: Vec<CJet> = family[0].iter().map(|x| x.zero_like()).collect();
    for (s, vi) in family.iter().zip(v) {
        let c = vi.to_complex();
        for (o, si) in out.iter_mut().zip(s) {
            *o += &(si * &c);
        }
    }
    out
}

/// Max modulus of the value parts of a jet spinor.
pub fn spinor_max(psi: &[CJet]) -> f64 {
    psi.iter().map(|x| x.value().norm()).fold(0.0, f64::max)
}

/// Max absolute value over the value parts of a frame tensor.
pub fn tensor_max(t: &JetMat<f64>) -> f64 {
    t.iter().flatten().map(|x| x.value().abs()).fold(0.0, f64::max)
}

/// A constant-component field.
pub fn constant_field(psi: &Spinor) -> SpinorFn {
    let psi = psi.clone();
    Arc::new(move |x: &[RJet]| {
        let c = x[0].to_complex();
        psi.0.iter().map(|&v| c.lift(v)).collect()
    })
}

/// `c·φ` for a constant complex `c`.
pub fn scaled_field(f: &SpinorFn, c: C64) -> SpinorFn {
    let f = f.clone();
    Arc::new(move |x: &[RJet]| spinor_scale(&f(x), c))
}

/// `φ + t φ_c`
pub fn affine_field(f: &SpinorFn, g: &SpinorFn, t: f64) -> SpinorFn {
    let (f, g) = (f.clone(), g.clone());
    Arc::new(move |x: &[RJet]| spinor_add(&f(x), &spinor_scale(&g(x), C64::new(t, 0.0))))
}

/// Random polynomial field of total degree at most 2 around `center`.
pub fn random_polynomial_field(dim: usize, center: &[f64], seed: u64, amp: f64) -> SpinorFn {
    let nv = center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut monomials: Vec<Vec<usize>> = vec![vec![]];
    for i in 0..nv {
        monomials.push(vec![i]);
    }
    for i in 0..nv {
        for j in i..nv {
            monomials.push(vec![i, j]);
        }
    }
    let coeffs: Vec<Vec<C64>> = monomials
        .iter()
        .map(|_| {
            (0..dim)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp)
                .collect()
        })
        .collect();
    let center = center.to_vec();
    Arc::new(move |x: &[RJet]| {
        let shifted: Vec<CJet> = x
            .iter()
            .zip(&center)
            .map(|(xi, &c)| xi.add_scalar(-c).to_complex())
            .collect();
        let mut out: Vec<CJet> = (0..dim).map(|_| shifted[0].zero_like()).collect();
        for (mono, cs) in monomials.iter().zip(&coeffs) {
            let mut m = shifted[0].lift(Complex64::new(1.0, 0.0));
            for &v in mono {
                m = &m * &shifted[v];
            }
            for (o, &c) in out.iter_mut().zip(cs) {
                *o += &m.scale(c);
            }
        }
        out
    })
}

/// Random periodic field `ψ_0 + amp Σ_m c_m e^{i m·x}` over integer modes
/// with entries in `{-1, 0, 1}`, at most two of them nonzero.
pub fn random_trig_field(base: &Spinor, nvars: usize, seed: u64, amp: f64) -> SpinorFn {
    let dim = base.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes: Vec<Vec<i32>> = Vec::new();
    let total = 3usize.pow(nvars as u32);
    for mut k in 0..total {
        let mut m = vec![0i32; nvars];
        for mi in m.iter_mut() {
            *mi = (k % 3) as i32 - 1;
            k /= 3;
        }
        let nz = m.iter().filter(|&&v| v != 0).count();
        if (1..=2).contains(&nz) {
            modes.push(m);
        }
    }
    let coeffs: Vec<Vec<C64>> = modes
        .iter()
        .map(|_| {
            (0..dim)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp)
                .collect()
        })
        .collect();
    let base = base.clone();
    Arc::new(move |x: &[RJet]| {
        let c0 = x[0].to_complex();
        let mut out: Vec<CJet> = base.0.iter().map(|&v| c0.lift(v)).collect();
        // e^{i m·x} as a product of e^{±i x_j}, since every m_j is in {-1, 0, 1}
        let waves: Vec<CJet> = x[..nvars]
            .iter()
            .map(|xi| &xi.cos().to_complex() + &xi.sin().to_complex().scale(Complex64::new(0.0, 1.0)))
            .collect();
        for (m, cs) in modes.iter().zip(&coeffs) {
            let mut e: Option<CJet> = None;
            for (w, &mi) in waves.iter().zip(m) {
                let f = match mi {
                    1 => w.clone(),
                    -1 => w.conj(),
                    _ => continue,
                };
                e = Some(match e {
                    Some(acc) => &acc * &f,
                    None => f,
                });
            }
            let e = e.expect("every mode has a nonzero entry");
            for (o, &c) in out.iter_mut().zip(cs) {
                *o += &e.scale(c);
            }
        }
        out
    })
}

/// `φ^k = (σφ, φ)^k φ`, with `σ` the sign of the length at evaluation.
pub fn power_field(model: &CliffordModel, f: &SpinorFn, k: f64) -> SpinorFn {
    let (model, f) = (model.clone(), f.clone());
    Arc::new(move |x: &[RJet]| {
        let phi = f(x);
        if k == 0.0 {
            return phi;
        }
        let len = model.re_inner_jet(&phi, &phi);
        let sigma = len.value().signum();
        let w = len.scale(sigma).powf(k).expect("length bounded away from zero");
        crate::clifford::spinor_mul_real(&phi, &w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{Signature, SUPPORTED_SIGNATURES};
    use crate::fixtures;

    fn max_diff(a: &[CJet], b: &[CJet]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x.value() - y.value()).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn flat_dirac_of_linear_field() {
        let chart = fixtures::flat_torus(2, 0).unwrap();
        let model = CliffordModel::build(Signature::new(2, 0).unwrap()).unwrap();
        let psi0 = Spinor(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5)]);
        let p = psi0.clone();
        // ψ = x_1 ψ_0, so Dψ = γ_1 ψ_0
        let f: SpinorFn = Arc::new(move |x: &[RJet]| {
            let c = x[0].to_complex();
            p.0.iter().map(|&v| c.scale(v)).collect()
        });
        let geo = chart.geometry(&[0.3, 0.7], 2).unwrap();
        let sc = SpinCalc::new(&geo, &model).unwrap();
        let d = sc.dirac(&sc.eval(&f).unwrap());
        let expect = model.apply_gamma(0, &psi0);
        assert!(d.iter().zip(&expect.0).all(|(a, b)| (a.value() - b).norm() < 1e-14));
    }

    #[test]
    fn lichnerowicz_on_sphere() {
        let chart = fixtures::round_sphere(2, 1.0).unwrap();
        let model = CliffordModel::build(chart.sig).unwrap();
        let f = random_polynomial_field(2, &[1.2, 0.8], 5, 0.5);
        for p in chart.sample_points(4, 3) {
            let geo = chart.geometry(&p, 4).unwrap();
            let sc = SpinCalc::new(&geo, &model).unwrap();
            let psi = sc.eval(&f).unwrap();
            let d2 = sc.dirac_pow(&psi, 2);
            let lap = sc.laplacian(&psi);
            let s = geo.scal().unwrap().value();
            let rhs: Vec<CJet> = lap.iter().zip(&psi).map(|(l, q)| l + &q.scale_real(s / 4.0)).collect();
            assert!(max_diff(&d2, &rhs) < 1e-10);
        }
    }

    #[test]
    fn signature_mismatch_rejected() {
        let chart = fixtures::flat_torus(2, 0).unwrap();
        let model = CliffordModel::build(Signature::new(3, 0).unwrap()).unwrap();
        let geo = chart.geometry(&[0.1, 0.1], 1).unwrap();
        assert!(matches!(SpinCalc::new(&geo, &model), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn constant_field_parallel_on_flat_tori() {
        for (n, r) in SUPPORTED_SIGNATURES {
            let chart = fixtures::flat_torus(n, r).unwrap();
            let model = CliffordModel::build(chart.sig).unwrap();
            let f = constant_field(&crate::warped::unit_spinor(&model));
            let p = chart.sample_points(1, 9).remove(0);
            let geo = chart.geometry(&p, 2).unwrap();
            let sc = SpinCalc::new(&geo, &model).unwrap();
            let psi = sc.eval(&f).unwrap();
            assert!(sc.cov_all(&psi).iter().all(|c| spinor_max(c) == 0.0));
        }
    }
}
