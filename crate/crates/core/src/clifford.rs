//! Complex spinor representations of real Clifford algebras in any
//! signature `(n, r)`, together with the indefinite spinor pairing.
//!
//! Sign convention: `X·Y + Y·X = -2 η(X, Y)`. For an orthonormal basis this
//! reads `γ_i γ_j + γ_j γ_i = -2 χ(i) δ_ij`, so spacelike generators square
//! to `-1` and timelike generators square to `+1`. Timelike directions are
//! always the last `r` basis indices.
//!
//! The pairing `⟨φ, ψ⟩ = φ^* A ψ` is conjugate-linear in its first slot. The
//! matrix `A` is the product of the timelike generators times a phase, and
//! satisfies `⟨γ_i φ, ψ⟩ + (-1)^r ⟨φ, γ_i ψ⟩ = 0`. The phase is not derived
//! by hand: all four candidates are tried and the first one meeting the
//! invariants is kept.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{CJet, RJet};

pub type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Default floor for `|(φ, φ)|` in [`CliffordModel::power_spinor`].
pub const LENGTH_FLOOR: f64 = 1e-10;

/// Dimension and index of a pseudo-Euclidean space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub n: usize,
    pub r: usize,
}

impl Signature {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n < 2 || r > n {
            return Err(Error::InvalidSignature { n, r });
        }
        Ok(Signature { n, r })
    }

    /// `η(E_i, E_i)`; timelike directions come last.
    pub fn chi(&self, i: usize) -> f64 {
        if i + self.r >= self.n {
            -1.0
        } else {
            1.0
        }
    }

    pub fn chis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.chi(i)).collect()
    }

    pub fn spinor_dim(&self) -> usize {
        1 << (self.n / 2)
    }

    /// `(-1)^r`
    pub fn sign_r(&self) -> f64 {
        if self.r.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `(√-1)^k`
    pub fn i_pow(k: usize) -> C64 {
        match k % 4 {
            0 => C64::new(1.0, 0.0),
            1 => I,
            2 => C64::new(-1.0, 0.0),
            _ => -I,
        }
    }

    /// `(√-1)^r`
    pub fn i_r(&self) -> C64 {
        Self::i_pow(self.r)
    }

    /// `(√-1)^{3r}`
    pub fn i_3r(&self) -> C64 {
        Self::i_pow(3 * self.r)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.r)
    }
}

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub dim: usize,
    pub data: Vec<C64>,
    /// nonzero entries per row, for fast application
    sparse: Vec<Vec<(usize, C64)>>,
}

impl CMat {
    pub fn from_data(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        let sparse = (0..dim)
            .map(|i| {
                (0..dim)
                    .filter_map(|j| {
                        let v = data[i * dim + j];
                        (v.norm() > 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        CMat { dim, data, sparse }
    }

    pub fn identity(dim: usize) -> Self {
        let mut d = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            d[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self::from_data(dim, d)
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        let n = self.dim;
        let mut d = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for &(k, a) in &self.sparse[i] {
                for j in 0..n {
                    d[i * n + j] += a * o.at(k, j);
                }
            }
        }
        CMat::from_data(n, d)
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat::from_data(self.dim, self.data.iter().map(|&x| x * s).collect())
    }

    pub fn add(&self, o: &CMat) -> CMat {
        CMat::from_data(self.dim, self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect())
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.dim;
        let mut d = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                d[j * n + i] = self.at(i, j).conj();
            }
        }
        CMat::from_data(n, d)
    }

    pub fn kron(&self, o: &CMat) -> CMat {
        let (n, m) = (self.dim, o.dim);
        let dim = n * m;
        let mut d = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..n {
            for j in 0..n {
                for k in 0..m {
                    for l in 0..m {
                        d[(i * m + k) * dim + j * m + l] = self.at(i, j) * o.at(k, l);
                    }
                }
            }
        }
        CMat::from_data(dim, d)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.sparse
            .iter()
            .map(|row| row.iter().map(|&(j, a)| a * v[j]).sum())
            .collect()
    }

    pub fn apply_jet(&self, v: &[CJet]) -> Vec<CJet> {
        self.sparse
            .iter()
            .map(|row| {
                let mut acc = v[0].zero_like();
                for &(j, a) in row {
                    acc += &v[j].scale(a);
                }
                acc
            })
            .collect()
    }
}

/// Spinor components relative to an orthonormal frame trivialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Spinor(pub Vec<C64>);

impl Spinor {
    pub fn zeros(n: usize) -> Self {
        Spinor(vec![C64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scale(&self, s: C64) -> Spinor {
        Spinor(self.0.iter().map(|&x| x * s).collect())
    }

    pub fn add(&self, o: &Spinor) -> Spinor {
        Spinor(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Spinor) -> Spinor {
        Spinor(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Spinor {
        Spinor(
            (0..n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }
}

/// Gamma matrices plus the pairing matrix for one signature.
#[derive(Debug, Clone)]
pub struct CliffordModel {
    pub sig: Signature,
    gamma: Vec<CMat>,
    adj: CMat,
    adj_hermitian: bool,
}

fn pauli() -> [CMat; 3] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    [
        CMat::from_data(2, vec![z, o, o, z]),
        CMat::from_data(2, vec![z, -I, I, z]),
        CMat::from_data(2, vec![o, z, z, -o]),
    ]
}

/// Hermitian generators with `Γ_i Γ_j + Γ_j Γ_i = 2 δ_ij`.
fn euclidean_generators(n: usize) -> Vec<CMat> {
    let [s1, s2, s3] = pauli();
    let m = n / 2;
    let id2 = CMat::identity(2);
    let chain = |k: usize, mid: &CMat| -> CMat {
        let mut acc = CMat::identity(1);
        for _ in 0..k {
            acc = acc.kron(&s3);
        }
        acc = acc.kron(mid);
        for _ in k + 1..m {
            acc = acc.kron(&id2);
        }
        acc
    };
    let mut out = Vec::with_capacity(n);
    for k in 0..m {
        out.push(chain(k, &s1));
        out.push(chain(k, &s2));
    }
    if n % 2 == 1 {
        let mut acc = CMat::identity(1);
        for _ in 0..m {
            acc = acc.kron(&s3);
        }
        out.push(acc);
    }
    out
}

impl CliffordModel {
    pub fn build(sig: Signature) -> Result<Self> {
        let euclid = euclidean_generators(sig.n);
        let gamma: Vec<CMat> = euclid
            .into_iter()
            .enumerate()
            .map(|(i, g)| if sig.chi(i) > 0.0 { g.scale(I) } else { g })
            .collect();
        let dim = sig.spinor_dim();
        let mut base = CMat::identity(dim);
        for g in gamma.iter().skip(sig.n - sig.r) {
            base = base.mul(g);
        }
        let sr = C64::new(sig.sign_r(), 0.0);
        let phases = [C64::new(1.0, 0.0), I, C64::new(-1.0, 0.0), -I];
        let skew_ok = |a: &CMat| {
            gamma.iter().all(|g| {
                let lhs = g.adjoint().mul(a).add(&a.mul(g).scale(sr));
                lhs.max_abs() < 1e-14
            })
        };
        let mut chosen = None;
        for want_hermitian in [true, false] {
            for &ph in &phases {
                let a = base.scale(ph);
                let adjd = a.adjoint();
                let herm = if want_hermitian {
                    adjd.add(&a.scale(C64::new(-1.0, 0.0))).max_abs() < 1e-14
                } else {
                    adjd.add(&a).max_abs() < 1e-14
                };
                if herm && skew_ok(&a) {
                    chosen = Some((a, want_hermitian));
                    break;
                }
            }
            if chosen.is_some() {
                break;
            }
        }
        let (adj, adj_hermitian) = chosen
            .ok_or_else(|| Error::Construction(format!("no pairing phase satisfies the invariants for {sig}")))?;
        let model = CliffordModel {
            sig,
            gamma,
            adj,
            adj_hermitian,
        };
        let rel = model.clifford_relation_residual();
        if rel > 1e-14 {
            return Err(Error::Construction(format!(
                "clifford relation residual {rel:e} for {sig}"
            )));
        }
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.sig.spinor_dim()
    }

    pub fn n(&self) -> usize {
        self.sig.n
    }

    pub fn gamma(&self, i: usize) -> &CMat {
        &self.gamma[i]
    }

    pub fn adj(&self) -> &CMat {
        &self.adj
    }

    pub fn adj_is_hermitian(&self) -> bool {
        self.adj_hermitian
    }

    /// `max |γ_i γ_j + γ_j γ_i + 2 χ(i) δ_ij|`
    pub fn clifford_relation_residual(&self) -> f64 {
        let n = self.sig.n;
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = self.gamma[i]
                    .mul(&self.gamma[j])
                    .add(&self.gamma[j].mul(&self.gamma[i]));
                if i == j {
                    s = s.add(&CMat::identity(dim).scale(C64::new(2.0 * self.sig.chi(i), 0.0)));
                }
                worst = worst.max(s.max_abs());
            }
        }
        worst
    }

    /// Condition number of the pairing matrix (it is monomial up to phase).
    pub fn adj_condition(&self) -> f64 {
        let ata = self.adj.adjoint().mul(&self.adj);
        let d = self.dim();
        let diag: Vec<f64> = (0..d).map(|i| ata.at(i, i).re).collect();
        let off = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| ata.at(i, j).norm())
            .fold(0.0, f64::max);
        if off > 1e-12 {
            return f64::INFINITY;
        }
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        (max / min).sqrt()
    }

    pub fn apply_gamma(&self, i: usize, s: &Spinor) -> Spinor {
        Spinor(self.gamma[i].apply(&s.0))
    }

    pub fn clifford_mul(&self, v: &[f64], s: &Spinor) -> Result<Spinor> {
        if v.len() != self.sig.n {
            return Err(Error::DimensionMismatch {
                expected: self.sig.n,
                found: v.len(),
            });
        }
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: s.len(),
            });
        }
        let mut out = Spinor::zeros(self.dim());
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                out = out.add(&self.apply_gamma(i, s).scale(C64::new(vi, 0.0)));
            }
        }
        Ok(out)
    }

    pub fn inner(&self, phi: &Spinor, psi: &Spinor) -> C64 {
        let a_psi = self.adj.apply(&psi.0);
        phi.0.iter().zip(&a_psi).map(|(p, q)| p.conj() * q).sum()
    }

    pub fn re_inner(&self, phi: &Spinor, psi: &Spinor) -> f64 {
        self.inner(phi, psi).re
    }

    /// `φ^k = (σφ, φ)^k φ` and `σ = sign (φ, φ)`.
    pub fn power_spinor(&self, phi: &Spinor, k: f64) -> Result<(Spinor, f64)> {
        self.power_spinor_with_floor(phi, k, LENGTH_FLOOR)
    }

    pub fn power_spinor_with_floor(&self, phi: &Spinor, k: f64, floor: f64) -> Result<(Spinor, f64)> {
        let len = self.re_inner(phi, phi);
        if len.abs() < floor {
            return Err(Error::ZeroLength(len.abs()));
        }
        let sigma = len.signum();
        if k == 0.0 {
            return Ok((phi.clone(), sigma));
        }
        let factor = (sigma * len).powf(k);
        Ok((phi.scale(C64::new(factor, 0.0)), sigma))
    }

    // ---- jet-valued spinors ----

    pub fn gamma_jet(&self, i: usize, s: &[CJet]) -> Vec<CJet> {
        self.gamma[i].apply_jet(s)
    }

    /// `Σ_i v_i γ_i s` with real jet coefficients.
    pub fn clifford_mul_jet(&self, v: &[RJet], s: &[CJet]) -> Vec<CJet> {
        let mut out: Vec<CJet> = s.iter().map(|x| x.zero_like()).collect();
        for (i, vi) in v.iter().enumerate() {
            let g = self.gamma_jet(i, s);
            let vc = vi.to_complex();
            for (o, gi) in out.iter_mut().zip(&g) {
                *o += &(gi * &vc);
            }
        }
        out
    }

    pub fn inner_jet(&self, phi: &[CJet], psi: &[CJet]) -> CJet {
        let a_psi = self.adj.apply_jet(psi);
        let mut acc = phi[0].conj() * &a_psi[0];
        for k in 1..phi.len() {
            acc += &(phi[k].conj() * &a_psi[k]);
        }
        acc
    }

    pub fn re_inner_jet(&self, phi: &[CJet], psi: &[CJet]) -> RJet {
        self.inner_jet(phi, psi).re()
    }
}

// ---- helpers on jet spinors ----

pub fn spinor_add(a: &[CJet], b: &[CJet]) -> Vec<CJet> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn spinor_sub(a: &[CJet], b: &[CJet]) -> Vec<CJet> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn spinor_scale(a: &[CJet], s: C64) -> Vec<CJet> {
    a.iter().map(|x| x.scale(s)).collect()
}

pub fn spinor_mul_real(a: &[CJet], f: &RJet) -> Vec<CJet> {
    let fc = f.to_complex();
    a.iter().map(|x| x * &fc).collect()
}

pub fn spinor_values(a: &[CJet]) -> Spinor {
    Spinor(a.iter().map(|x| x.value()).collect())
}

pub fn spinor_const(values: &Spinor, like: &RJet) -> Vec<CJet> {
    let c = like.to_complex();
    values.0.iter().map(|&v| c.lift(v)).collect()
}

/// Signatures exercised by the identity checks.
pub const SUPPORTED_SIGNATURES: [(usize, usize); 7] = [(2, 0), (3, 0), (4, 0), (5, 0), (2, 1), (3, 1), (4, 1)];

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(n: usize, r: usize) -> CliffordModel {
        CliffordModel::build(Signature::new(n, r).unwrap()).unwrap()
    }

    #[test]
    fn euclidean_plane_generators_square_to_minus_one() {
        let m = model(2, 0);
        assert_eq!(m.dim(), 2);
        for i in 0..2 {
            let sq = m.gamma(i).mul(m.gamma(i));
            assert!(sq.add(&CMat::identity(2)).max_abs() < 1e-15);
        }
    }

    #[test]
    fn odd_dimension_spinor_size() {
        assert_eq!(model(3, 0).dim(), 2);
        assert_eq!(model(5, 0).dim(), 4);
    }

    #[test]
    fn lorentzian_skew_pairing() {
        let m = model(4, 1);
        assert_eq!(m.dim(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let phi = Spinor::random(4, &mut rng);
            let psi = Spinor::random(4, &mut rng);
            for i in 0..4 {
                let lhs = m.inner(&m.apply_gamma(i, &phi), &psi);
                let rhs = m.inner(&phi, &m.apply_gamma(i, &psi));
                // (-1)^r = -1
                worst = worst.max((lhs - rhs).norm());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn vector_squares_to_minus_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(n, r) in &SUPPORTED_SIGNATURES {
            let m = model(n, r);
            for _ in 0..20 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let psi = Spinor::random(m.dim(), &mut rng);
                let xx = m.clifford_mul(&x, &m.clifford_mul(&x, &psi).unwrap()).unwrap();
                let norm: f64 = x.iter().enumerate().map(|(i, v)| m.sig.chi(i) * v * v).sum();
                let res = xx.add(&psi.scale(C64::new(norm, 0.0))).max_abs();
                assert!(res < 1e-13);
            }
        }
    }

    #[test]
    fn basis_vector_multiplication_is_gamma() {
        let m = model(3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = Spinor::random(2, &mut rng);
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            assert_eq!(m.clifford_mul(&e, &s).unwrap(), m.apply_gamma(i, &s));
        }
        assert!(m.clifford_mul(&[1.0, 0.0], &s).is_err());
    }

    #[test]
    fn pairing_is_well_conditioned() {
        for &(n, r) in &SUPPORTED_SIGNATURES {
            let m = model(n, r);
            assert!(m.adj_condition() < 10.0);
            assert!(m.adj_is_hermitian());
        }
    }

    #[test]
    fn hermitian_pairing_is_real_on_diagonal() {
        let m = model(4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = Spinor::random(4, &mut rng);
        assert!(m.inner(&s, &s).im.abs() < 1e-15);
    }

    #[test]
    fn spinor_powers() {
        let m = model(3, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = Spinor::random(2, &mut rng);
        let (p0, _) = m.power_spinor(&phi, 0.0).unwrap();
        assert_eq!(p0, phi);
        let (ph, s) = m.power_spinor(&phi, -0.5).unwrap();
        assert!((s * m.re_inner(&ph, &ph) - 1.0).abs() < 1e-14);
        let two = Spinor(vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)]);
        let (p1, s1) = m.power_spinor(&two, 1.0).unwrap();
        assert_eq!(s1, 1.0);
        assert!(p1.sub(&two.scale(C64::new(4.0, 0.0))).max_abs() < 1e-14);
        assert!(matches!(
            m.power_spinor(&Spinor::zeros(2), 1.0),
            Err(Error::ZeroLength(_))
        ));
    }

    #[test]
    fn invalid_signatures_rejected() {
        assert!(Signature::new(1, 0).is_err());
        assert!(Signature::new(3, 4).is_err());
    }

    #[test]
    fn timelike_indices_are_last() {
        let s = Signature::new(4, 1).unwrap();
        assert_eq!(s.chis(), vec![1.0, 1.0, 1.0, -1.0]);
    }
}
