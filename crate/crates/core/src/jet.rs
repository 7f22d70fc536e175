//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients of a function of `nvars`
//! variables around a base point, up to total degree `order`. Coefficients
//! are laid out in graded order: all multi-indices of degree 0, then degree
//! 1, and so on. Within one degree the layout does not depend on the maximal
//! order, so truncating a jet to a lower order is a prefix slice.
//!
//! Differentiating a jet lowers its order by one. Binary operations between
//! jets of different orders produce a jet of the smaller order, so a chain of
//! computations automatically keeps track of how many derivatives remain
//! exact.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::{Complex64, ComplexFloat};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

/// Coefficient field of a jet: `f64` or `Complex64`.
pub trait Scalar: ComplexFloat<Real = f64> + From<f64> + fmt::Debug + Default + Send + Sync + 'static {}

impl Scalar for f64 {}
impl Scalar for Complex64 {}

/// Embeds a real number in the coefficient field.
pub fn re<T: Scalar>(x: f64) -> T {
    <T as From<f64>>::from(x)
}

pub type RJet = Jet<f64>;
pub type CJet = Jet<Complex64>;

/// Index bookkeeping shared by every jet with the same `(nvars, order)`.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    indices: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    degree: Vec<usize>,
    /// `(i, j, k)`: the product of coefficients `i` and `j` lands in `k`.
    mul: Vec<(u32, u32, u32)>,
    /// Per variable: `(src, dst, factor)` mapping into the space of order - 1.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    /// The space of order - 1, target of differentiation.
    lower: Option<Arc<JetSpace>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("len", &self.indices.len())
            .finish()
    }
}

type SpaceCache = Mutex<HashMap<(usize, usize), Arc<JetSpace>>>;

static SPACES: LazyLock<SpaceCache> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Number of monomials of degree at most `order` in `nvars` variables.
pub fn coeff_count(nvars: usize, order: usize) -> usize {
    // C(nvars + order, order)
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..order {
        num *= (nvars + order - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as usize
}

fn indices_of_degree(nvars: usize, degree: usize) -> Vec<Vec<u8>> {
    // lexicographically descending: x0^d first
    fn rec(nvars: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=left).rev() {
            prefix.push(a as u8);
            rec(nvars, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, degree, &mut Vec::with_capacity(nvars), &mut out);
    out
}

impl JetSpace {
    fn build(nvars: usize, order: usize, lower: Option<Arc<JetSpace>>) -> JetSpace {
        let mut indices = Vec::new();
        let mut degree = Vec::new();
        for d in 0..=order {
            for idx in indices_of_degree(nvars, d) {
                indices.push(idx);
                degree.push(d);
            }
        }
        debug_assert_eq!(indices.len(), coeff_count(nvars, order));
        let lookup: HashMap<Vec<u8>, usize> = indices.iter().enumerate().map(|(k, idx)| (idx.clone(), k)).collect();
        let mut mul = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if degree[i] + degree[j] > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul.push((i as u32, j as u32, lookup[&sum] as u32));
            }
        }
        mul.sort_by_key(|&(_, _, k)| k);
        let mut deriv = vec![Vec::new(); nvars];
        if order > 0 {
            for (v, table) in deriv.iter_mut().enumerate() {
                for (src, idx) in indices.iter().enumerate() {
                    if idx[v] == 0 {
                        continue;
                    }
                    let mut lower = idx.clone();
                    lower[v] -= 1;
                    // lower has degree < order and the layout is shared, so
                    // its position in this space equals its position below
                    let dst = lookup[&lower];
                    table.push((src as u32, dst as u32, idx[v] as f64));
                }
            }
        }
        JetSpace {
            nvars,
            order,
            indices,
            lookup,
            degree,
            mul,
            deriv,
            lower,
        }
    }

    pub fn get(nvars: usize, order: usize) -> Arc<JetSpace> {
        if let Some(s) = SPACES.lock().expect("jet space cache poisoned").get(&(nvars, order)) {
            return s.clone();
        }
        let lower = (order > 0).then(|| JetSpace::get(nvars, order - 1));
        let built = Arc::new(JetSpace::build(nvars, order, lower));
        SPACES
            .lock()
            .expect("jet space cache poisoned")
            .entry((nvars, order))
            .or_insert(built)
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_index(&self, k: usize) -> &[u8] {
        &self.indices[k]
    }

    pub fn degree_of(&self, k: usize) -> usize {
        self.degree[k]
    }

    pub fn position(&self, idx: &[u8]) -> Option<usize> {
        self.lookup.get(idx).copied()
    }
}

/// Coefficient storage; small jets stay on the stack.
type Coeffs<T> = SmallVec<[T; 10]>;

/// Truncated Taylor expansion with coefficients in `T`.
#[derive(Clone)]
pub struct Jet<T: Scalar> {
    space: Arc<JetSpace>,
    c: Coeffs<T>,
}

impl<T: Scalar> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Jet(nvars={}, order={}, {:?})",
            self.space.nvars, self.space.order, self.c
        )
    }
}

impl<T: Scalar> PartialEq for Jet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.space.nvars == other.space.nvars && self.space.order == other.space.order && self.c == other.c
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, x| acc * x as f64)
}

impl<T: Scalar> Jet<T> {
    pub fn zero(nvars: usize, order: usize) -> Self {
        let space = JetSpace::get(nvars, order);
        let c = smallvec![T::zero(); space.len()];
        Jet { space, c }
    }

    pub fn constant(nvars: usize, order: usize, value: T) -> Self {
        let mut j = Self::zero(nvars, order);
        j.c[0] = value;
        j
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: T) -> Self {
        assert!(var < nvars, "variable index {var} out of range");
        let mut j = Self::constant(nvars, order, value);
        if order > 0 {
            let mut idx = vec![0u8; nvars];
            idx[var] = 1;
            let k = j.space.position(&idx).expect("degree-one index");
            j.c[k] = T::one();
        }
        j
    }

    /// Builds a jet from raw graded coefficients.
    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<T>) -> Result<Self> {
        let space = JetSpace::get(nvars, order);
        if coeffs.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                found: coeffs.len(),
            });
        }
        Ok(Jet {
            space,
            c: Coeffs::from_vec(coeffs),
        })
    }

    /// A constant with the same shape as `self`.
    pub fn lift(&self, value: T) -> Self {
        let mut c = smallvec![T::zero(); self.c.len()];
        c[0] = value;
        Jet {
            space: self.space.clone(),
            c,
        }
    }

    pub fn zero_like(&self) -> Self {
        self.lift(T::zero())
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    /// Constant term.
    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Taylor coefficient for a multi-index.
    pub fn coeff(&self, idx: &[u8]) -> Option<T> {
        self.space.position(idx).map(|k| self.c[k])
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.space.order {
            return self.clone();
        }
        let space = JetSpace::get(self.space.nvars, order);
        let c = Coeffs::from_slice(&self.c[..space.len()]);
        Jet { space, c }
    }

    /// Partial derivative value: coefficient times the multi-index factorial.
    pub fn partial(&self, idx: &[usize]) -> Result<T> {
        if idx.len() != self.space.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.space.nvars,
                found: idx.len(),
            });
        }
        let total: usize = idx.iter().sum();
        if total > self.space.order {
            return Err(Error::OrderExceeded {
                needed: total,
                available: self.space.order,
            });
        }
        let key: Vec<u8> = idx.iter().map(|&a| a as u8).collect();
        let k = self.space.position(&key).expect("index within order");
        let fact: f64 = idx.iter().map(|&a| factorial(a)).product();
        Ok(self.c[k] * re::<T>(fact))
    }

    /// `∂/∂x_var`, one order lower. Panics on an order-zero jet; callers
    /// check the order budget up front.
    pub fn deriv(&self, var: usize) -> Self {
        assert!(
            self.space.order > 0,
            "cannot differentiate an order-0 jet (order budget exhausted)"
        );
        let space = self.space.lower.clone().expect("order > 0 has a lower space");
        let mut c = smallvec![T::zero(); space.len()];
        for &(src, dst, fac) in &self.space.deriv[var] {
            c[dst as usize] = c[dst as usize] + self.c[src as usize] * re::<T>(fac);
        }
        Jet { space, c }
    }

    pub fn checked_deriv(&self, var: usize) -> Result<Self> {
        if self.space.order == 0 {
            return Err(Error::OrderExceeded {
                needed: 1,
                available: 0,
            });
        }
        Ok(self.deriv(var))
    }

    pub fn scale(&self, s: T) -> Self {
        Jet {
            space: self.space.clone(),
            c: self.c.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: T) -> Self {
        let mut out = self.clone();
        out.c[0] = out.c[0] + s;
        out
    }

    fn pair_space<'a>(a: &'a Self, b: &'a Self) -> &'a Arc<JetSpace> {
        assert_eq!(a.space.nvars, b.space.nvars, "jets over different variable counts");
        if a.space.order <= b.space.order {
            &a.space
        } else {
            &b.space
        }
    }

    fn mul_jet(&self, other: &Self) -> Self {
        let space = Self::pair_space(self, other).clone();
        let mut c = smallvec![T::zero(); space.len()];
        for &(i, j, k) in &space.mul {
            c[k as usize] = c[k as usize] + self.c[i as usize] * other.c[j as usize];
        }
        Jet { space, c }
    }

    /// `f(self)` where `derivs[k]` is the k-th derivative of `f` at the
    /// constant term.
    pub fn compose(&self, derivs: &[T]) -> Self {
        let order = self.space.order;
        assert!(derivs.len() > order, "need {} derivatives", order + 1);
        let mut delta = self.clone();
        delta.c[0] = T::zero();
        let mut acc = self.lift(derivs[order] / re::<T>(factorial(order)));
        for k in (0..order).rev() {
            acc = acc.mul_jet(&delta);
            acc.c[0] = acc.c[0] + derivs[k] / re::<T>(factorial(k));
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.space.order + 1])
    }

    pub fn ln(&self) -> Result<Self> {
        let a0 = self.value();
        if a0 == T::zero() || (a0.im() == 0.0 && a0.re() <= 0.0) {
            return Err(Error::Domain(format!("log of {a0:?}")));
        }
        let mut d = vec![a0.ln()];
        for k in 1..=self.space.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(re::<T>(sign * factorial(k - 1)) / a0.powi(k as i32));
        }
        Ok(self.compose(&d))
    }

    /// `self^alpha` for real alpha (principal branch).
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        let a0 = self.value();
        if a0 == T::zero() {
            return Err(Error::Domain("power of a jet with zero constant term".into()));
        }
        let mut d = Vec::with_capacity(self.space.order + 1);
        let mut falling = 1.0;
        for k in 0..=self.space.order {
            d.push(re::<T>(falling) * a0.powf(alpha - k as f64));
            falling *= alpha - k as f64;
        }
        Ok(self.compose(&d))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let a0 = self.value();
        if a0.im() == 0.0 && a0.re() < 0.0 {
            return Err(Error::Domain(format!("sqrt of {a0:?}")));
        }
        self.powf(0.5)
    }

    pub fn recip(&self) -> Result<Self> {
        let a0 = self.value();
        if a0 == T::zero() {
            return Err(Error::DivByZeroJet);
        }
        let mut d = Vec::with_capacity(self.space.order + 1);
        for k in 0..=self.space.order {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            d.push(re::<T>(sign * factorial(k)) / a0.powi(k as i32 + 1));
        }
        Ok(self.compose(&d))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_jet(&other.recip()?))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let d: Vec<T> = (0..=self.space.order)
            .map(|k| match k % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            })
            .collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let d: Vec<T> = (0..=self.space.order)
            .map(|k| match k % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            })
            .collect();
        self.compose(&d)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = self.lift(T::one());
        for _ in 0..n {
            acc = acc.mul_jet(self);
        }
        acc
    }

    /// Max-norm of the coefficients.
    pub fn norm_max(&self) -> f64 {
        self.c.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

impl RJet {
    pub fn to_complex(&self) -> CJet {
        Jet {
            space: self.space.clone(),
            c: self.c.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Seeded coordinate jets for a base point.
    pub fn seed(point: &[f64], order: usize) -> Vec<RJet> {
        let n = point.len();
        (0..n).map(|i| RJet::variable(n, order, i, point[i])).collect()
    }
}

impl CJet {
    pub fn conj(&self) -> CJet {
        Jet {
            space: self.space.clone(),
            c: self.c.iter().map(|x| x.conj()).collect(),
        }
    }

    pub fn re(&self) -> RJet {
        Jet {
            space: self.space.clone(),
            c: self.c.iter().map(|x| x.re).collect(),
        }
    }

    pub fn im(&self) -> RJet {
        Jet {
            space: self.space.clone(),
            c: self.c.iter().map(|x| x.im).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CJet {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Product with a real jet.
    pub fn mul_real(&self, r: &RJet) -> CJet {
        self * &r.to_complex()
    }
}

fn zip_with<T: Scalar>(a: &Jet<T>, b: &Jet<T>, f: impl Fn(T, T) -> T) -> Jet<T> {
    let space = Jet::pair_space(a, b).clone();
    let c = (0..space.len()).map(|k| f(a.c[k], b.c[k])).collect();
    Jet { space, c }
}

impl<T: Scalar> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: &Jet<T>) -> Jet<T> {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl<T: Scalar> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: &Jet<T>) -> Jet<T> {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl<T: Scalar> Mul for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: &Jet<T>) -> Jet<T> {
        self.mul_jet(rhs)
    }
}

impl<T: Scalar> Div for &Jet<T> {
    type Output = Jet<T>;
    /// Panics when the divisor has a zero constant term; use
    /// [`Jet::checked_div`] when that can happen.
    fn div(self, rhs: &Jet<T>) -> Jet<T> {
        self.checked_div(rhs).expect("jet division by zero")
    }
}

impl<T: Scalar> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        Jet {
            space: self.space.clone(),
            c: self.c.iter().map(|&x| -x).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: Jet<T>) -> Jet<T> {
                (&self).$m(&rhs)
            }
        }
        impl<T: Scalar> $tr<&Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: &Jet<T>) -> Jet<T> {
                (&self).$m(rhs)
            }
        }
        impl<T: Scalar> $tr<Jet<T>> for &Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: Jet<T>) -> Jet<T> {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        -&self
    }
}

impl<T: Scalar> AddAssign<&Jet<T>> for Jet<T> {
    fn add_assign(&mut self, rhs: &Jet<T>) {
        if rhs.space.order < self.space.order {
            *self = &*self + rhs;
        } else {
            for (x, &y) in self.c.iter_mut().zip(&rhs.c) {
                *x = *x + y;
            }
        }
    }
}

impl<T: Scalar> AddAssign for Jet<T> {
    fn add_assign(&mut self, rhs: Jet<T>) {
        *self += &rhs;
    }
}

impl<T: Scalar> SubAssign<&Jet<T>> for Jet<T> {
    fn sub_assign(&mut self, rhs: &Jet<T>) {
        if rhs.space.order < self.space.order {
            *self = &*self - rhs;
        } else {
            for (x, &y) in self.c.iter_mut().zip(&rhs.c) {
                *x = *x - y;
            }
        }
    }
}

impl<T: Scalar> MulAssign<T> for Jet<T> {
    fn mul_assign(&mut self, s: T) {
        for x in &mut self.c {
            *x = *x * s;
        }
    }
}

impl<T: Scalar> Mul<T> for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, s: T) -> Jet<T> {
        self.scale(s)
    }
}

impl<T: Scalar> Mul<T> for Jet<T> {
    type Output = Jet<T>;
    fn mul(mut self, s: T) -> Jet<T> {
        self *= s;
        self
    }
}

/// Sum of jets, or `None` for an empty iterator.
pub fn sum<'a, T: Scalar, I: IntoIterator<Item = &'a Jet<T>>>(items: I) -> Option<Jet<T>> {
    let mut it = items.into_iter();
    let mut acc = it.next()?.clone();
    for j in it {
        acc += j;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn coefficient_count_matches_binomial() {
        for nvars in 1..=5 {
            for order in 0..=5 {
                assert_eq!(JetSpace::get(nvars, order).len(), coeff_count(nvars, order));
            }
        }
        assert_eq!(coeff_count(4, 4), 70);
    }

    #[test]
    fn square_of_seeded_variable() {
        let x = RJet::variable(1, 2, 0, 3.0);
        let sq = &x * &x;
        assert_eq!(sq.coeffs(), &[9.0, 6.0, 1.0]);
    }

    #[test]
    fn exp_series_at_zero() {
        let x = RJet::variable(1, 3, 0, 0.0);
        let e = x.exp();
        let expect = [1.0, 1.0, 0.5, 1.0 / 6.0];
        for (a, b) in e.coeffs().iter().zip(expect) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn sine_derivative_is_cosine() {
        let x = RJet::variable(1, 4, 0, 0.7);
        let d = x.sin().partial(&[1]).unwrap();
        assert!((d - 0.7f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn partials_of_x2y() {
        let v = RJet::seed(&[2.0, 3.0], 4);
        let f = &(&v[0] * &v[0]) * &v[1];
        assert!((f.partial(&[2, 1]).unwrap() - 2.0).abs() < 1e-14);
        assert!((f.partial(&[1, 0]).unwrap() - 12.0).abs() < 1e-13);
        assert!((f.partial(&[0, 0]).unwrap() - 12.0).abs() < 1e-13);
        assert!(f.partial(&[3, 2]).is_err());
    }

    #[test]
    fn constant_has_vanishing_partials() {
        let c = RJet::constant(3, 3, 2.5);
        assert_eq!(c.partial(&[1, 0, 1]).unwrap(), 0.0);
        assert_eq!(c.partial(&[0, 0, 0]).unwrap(), 2.5);
    }

    #[test]
    fn seed_variable_gradient() {
        let v = RJet::seed(&[0.1, 0.2, 0.3], 2);
        for (i, vi) in v.iter().enumerate() {
            let mut idx = [0usize; 3];
            idx[i] = 1;
            assert_eq!(vi.partial(&idx).unwrap(), 1.0);
        }
    }

    #[test]
    fn mixed_partials_commute() {
        let v = RJet::seed(&[0.4, -0.3], 4);
        let f = (&v[0] * &v[1]).exp();
        let d12 = f.deriv(0).deriv(1).value();
        let d21 = f.deriv(1).deriv(0).value();
        assert!((d12 - d21).abs() < 1e-13);
        let x: f64 = 0.4;
        let y: f64 = -0.3;
        let exact = (1.0 + x * y) * (x * y).exp();
        assert!((d12 - exact).abs() < 1e-13);
    }

    #[test]
    fn division_round_trip() {
        let v = RJet::seed(&[0.5, 1.5], 4);
        let a = &v[0].sin() + &(&v[1] * &v[0]);
        let b = v[1].exp();
        let back = &(&a * &b) / &b;
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn raising_order_keeps_lower_coefficients() {
        let lo = RJet::seed(&[0.3, 0.9], 2);
        let hi = RJet::seed(&[0.3, 0.9], 4);
        let f = |v: &[RJet]| (&v[0] * &v[1]).sin().exp();
        let a = f(&lo);
        let b = f(&hi).truncate(2);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_errors() {
        let x = RJet::variable(1, 2, 0, -1.0);
        assert!(x.ln().is_err());
        assert!(x.sqrt().is_err());
        let z = RJet::variable(1, 2, 0, 0.0);
        assert!(matches!(z.recip(), Err(Error::DivByZeroJet)));
    }

    #[test]
    fn derivative_lowers_order() {
        let x = RJet::variable(2, 3, 0, 1.0);
        let d = x.powi(3).deriv(0);
        assert_eq!(d.order(), 2);
        assert!((d.value() - 3.0).abs() < 1e-14);
        assert!(RJet::constant(2, 0, 1.0).checked_deriv(0).is_err());
    }

    #[test]
    fn complex_jets_conjugate_and_split() {
        let x = RJet::variable(1, 2, 0, 0.3).to_complex();
        let z = &x * &x.lift(Complex64::new(0.0, 1.0));
        let w = &z * &z.conj();
        assert!(w.im().norm_max() < 1e-16);
        assert!((w.re().value() - 0.09).abs() < 1e-15);
    }
}
