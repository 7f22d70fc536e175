//! Small dense matrices with jet entries.

use crate::error::{Error, Result};
use crate::jet::{re, Jet, Scalar};

pub type JetMat<T> = Vec<Vec<Jet<T>>>;

pub fn identity<T: Scalar>(n: usize, like: &Jet<T>) -> JetMat<T> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| like.lift(if i == j { T::one() } else { T::zero() }))
                .collect()
        })
        .collect()
}

pub fn matmul<T: Scalar>(a: &JetMat<T>, b: &JetMat<T>) -> JetMat<T> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = &a[i][0] * &b[0][j];
                    for l in 1..k {
                        acc += &(&a[i][l] * &b[l][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn matvec<T: Scalar>(a: &JetMat<T>, v: &[Jet<T>]) -> Vec<Jet<T>> {
    a.iter()
        .map(|row| {
            let mut acc = &row[0] * &v[0];
            for l in 1..v.len() {
                acc += &(&row[l] * &v[l]);
            }
            acc
        })
        .collect()
}

pub fn transpose<T: Scalar>(a: &JetMat<T>) -> JetMat<T> {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn scale<T: Scalar>(a: &JetMat<T>, s: T) -> JetMat<T> {
    a.iter().map(|row| row.iter().map(|x| x.scale(s)).collect()).collect()
}

pub fn add<T: Scalar>(a: &JetMat<T>, b: &JetMat<T>) -> JetMat<T> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting on the constant terms.
pub fn inverse<T: Scalar>(a: &JetMat<T>) -> Result<JetMat<T>> {
    let n = a.len();
    let mut m: JetMat<T> = a.to_vec();
    let mut inv = identity(n, &a[0][0]);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].value().abs().partial_cmp(&m[j][col].value().abs()).unwrap())
            .unwrap();
        let pv = m[piv][col].value().abs();
        if pv < 1e-14 {
            return Err(Error::DegenerateMetric { pivot: pv });
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let r = m[col][col].recip()?;
        for j in 0..n {
            m[col][j] = &m[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[i][col].clone();
            for j in 0..n {
                let t = &f * &m[col][j];
                m[i][j] -= &t;
                let t = &f * &inv[col][j];
                inv[i][j] -= &t;
            }
        }
    }
    Ok(inv)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm<T: Scalar>(a: &JetMat<T>) -> JetMat<T> {
    let n = a.len();
    let norm = a
        .iter()
        .map(|row| row.iter().map(|x| x.norm_max()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.25 {
        s += 1;
    }
    let scaled = scale(a, re::<T>(1.0 / 2f64.powi(s as i32)));
    let mut term = identity(n, &a[0][0]);
    let mut acc = term.clone();
    for k in 1..=20 {
        term = scale(&matmul(&term, &scaled), re::<T>(1.0 / k as f64));
        acc = add(&acc, &term);
        let size = term.iter().flatten().map(|x| x.norm_max()).fold(0.0, f64::max);
        if size < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        acc = matmul(&acc, &acc);
    }
    acc
}

pub fn values<T: Scalar>(a: &JetMat<T>) -> Vec<Vec<T>> {
    a.iter().map(|row| row.iter().map(|x| x.value()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::RJet;

    #[test]
    fn inverse_of_jet_matrix() {
        let v = RJet::seed(&[0.3, 0.7], 3);
        let a: JetMat<f64> = vec![
            vec![v[0].exp(), &v[1] * &v[0]],
            vec![v[1].sin(), v[0].lift(2.0) + &v[1]],
        ];
        let inv = inverse(&a).unwrap();
        let id = matmul(&a, &inv);
        for (i, row) in id.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((x.value() - target).abs() < 1e-13);
                assert!(x.deriv(0).norm_max() < 1e-12);
            }
        }
    }

    #[test]
    fn expm_of_diagonal_matches_scalar_exp() {
        let v = RJet::seed(&[0.2], 3);
        let z = v[0].zero_like();
        let a: JetMat<f64> = vec![vec![v[0].scale(3.0), z.clone()], vec![z, v[0].scale(-1.0)]];
        let e = expm(&a);
        let e0 = v[0].scale(3.0).exp();
        for (x, y) in e[0][0].coeffs().iter().zip(e0.coeffs()) {
            assert!((x - y).abs() < 1e-12 * y.abs().max(1.0));
        }
        assert!(e[0][1].norm_max() < 1e-15);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let c = RJet::constant(1, 0, 0.0);
        let th = 1.3;
        let a: JetMat<f64> = vec![vec![c.lift(0.0), c.lift(-th)], vec![c.lift(th), c.lift(0.0)]];
        let e = values(&expm(&a));
        assert!((e[0][0] - th.cos()).abs() < 1e-14);
        assert!((e[1][0] - th.sin()).abs() < 1e-14);
    }
}
