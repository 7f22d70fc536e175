//! Coordinate charts and pointwise frame geometry.
//!
//! All geometric quantities are expressed in an orthonormal frame `E_i`
//! with `η(E_i, E_j) = χ(i) δ_ij`. The frame is either produced by
//! Gram-Schmidt on the coordinate basis or supplied by the chart. The
//! connection coefficients are `ω_ijk = η(∇_{E_i} E_j, E_k)`, so that
//! `∇_{E_i} E_j = Σ_k χ(k) ω_ijk E_k`.
//!
//! Jet order budget at a point evaluated with order `K`: metric and frame
//! carry `K`, the connection `K - 1`, curvature `K - 2`.

pub mod coordinate;
pub mod tensor;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::Signature;
use crate::error::{Error, Result};
use crate::jet::{CJet, RJet};
use crate::linalg::{self, JetMat};

pub use tensor::{cov_sym, div_sym, pair, ScalarData};

pub type MetricFn = Arc<dyn Fn(&[RJet]) -> JetMat<f64> + Send + Sync>;
/// Frame vectors as rows of coordinate components, given the coordinate
/// jets and the metric jets at the same point.
pub type FrameFn = Arc<dyn Fn(&[RJet], &JetMat<f64>) -> Result<JetMat<f64>> + Send + Sync>;
/// Scalar field on a chart.
pub type ScalarFn = Arc<dyn Fn(&[RJet]) -> RJet + Send + Sync>;
/// Symmetric tensor field in coordinate components.
pub type TensorFn = Arc<dyn Fn(&[RJet]) -> JetMat<f64> + Send + Sync>;

/// Pivot floor for the Gram-Schmidt frame.
pub const PIVOT_FLOOR: f64 = 1e-10;

#[derive(Clone)]
pub struct Chart {
    pub name: String,
    pub sig: Signature,
    metric: MetricFn,
    frame: Option<FrameFn>,
    /// Sampling box for each coordinate.
    pub domain: Vec<(f64, f64)>,
    /// Whether the chart closes up periodically on its domain box, which
    /// makes quadrature over the box an integral over a closed manifold.
    pub periodic: bool,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("sig", &self.sig)
            .field("domain", &self.domain)
            .field("periodic", &self.periodic)
            .finish()
    }
}

impl Chart {
    pub fn new(name: impl Into<String>, sig: Signature, domain: Vec<(f64, f64)>, metric: MetricFn) -> Self {
        assert_eq!(domain.len(), sig.n);
        Chart {
            name: name.into(),
            sig,
            metric,
            frame: None,
            domain,
            periodic: false,
        }
    }

    pub fn with_frame(mut self, frame: FrameFn) -> Self {
        self.frame = Some(frame);
        self
    }

    pub fn periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.sig.n
    }

    pub fn metric_fn(&self) -> MetricFn {
        self.metric.clone()
    }

    pub fn frame_fn(&self) -> FrameFn {
        match &self.frame {
            Some(f) => f.clone(),
            None => {
                let sig = self.sig;
                Arc::new(move |_x: &[RJet], g: &JetMat<f64>| gram_schmidt(g, sig))
            }
        }
    }

    pub fn metric_at(&self, x: &[RJet]) -> JetMat<f64> {
        (self.metric)(x)
    }

    pub fn frame_at(&self, x: &[RJet], g: &JetMat<f64>) -> Result<JetMat<f64>> {
        match &self.frame {
            Some(f) => f(x, g),
            None => gram_schmidt(g, self.sig),
        }
    }

    pub fn geometry(&self, point: &[f64], order: usize) -> Result<PointGeometry> {
        PointGeometry::new(self, point, order)
    }

    /// Uniform random points in the domain box, reproducible from `seed`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| self.domain.iter().map(|&(a, b)| rng.gen_range(a..b)).collect())
            .collect()
    }

    /// Tensor-product grid with `m` nodes per coordinate, endpoint excluded
    /// (the periodic trapezoidal rule). Returns points and the cell volume.
    pub fn grid(&self, m: usize) -> (Vec<Vec<f64>>, f64) {
        let n = self.dim();
        let steps: Vec<f64> = self.domain.iter().map(|&(a, b)| (b - a) / m as f64).collect();
        let total = m.pow(n as u32);
        let pts = (0..total)
            .map(|mut k| {
                let mut p = vec![0.0; n];
                for (d, pd) in p.iter_mut().enumerate() {
                    *pd = self.domain[d].0 + steps[d] * (k % m) as f64;
                    k /= m;
                }
                p
            })
            .collect();
        (pts, steps.iter().product())
    }
}

/// `g(v, w) = Σ v^a g_ab w^b`
pub fn metric_pair(g: &JetMat<f64>, v: &[RJet], w: &[RJet]) -> RJet {
    let n = v.len();
    let mut acc = v[0].zero_like();
    for a in 0..n {
        for b in 0..n {
            acc += &(&(&v[a] * &g[a][b]) * &w[b]);
        }
    }
    acc
}

/// Signature-aware Gram-Schmidt on the coordinate basis, in coordinate
/// order. The resulting sign sequence must match `sig` (timelike last).
pub fn gram_schmidt(g: &JetMat<f64>, sig: Signature) -> Result<JetMat<f64>> {
    let n = g.len();
    if n != sig.n {
        return Err(Error::DimensionMismatch {
            expected: sig.n,
            found: n,
        });
    }
    let zero = g[0][0].zero_like();
    let mut frame: JetMat<f64> = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for a in 0..n {
        let mut w: Vec<RJet> = (0..n).map(|b| zero.lift(if a == b { 1.0 } else { 0.0 })).collect();
        let va = w.clone();
        for (b, eb) in frame.iter().enumerate() {
            let c = metric_pair(g, &va, eb).scale(signs[b]);
            for (wc, ebc) in w.iter_mut().zip(eb) {
                *wc -= &(&c * ebc);
            }
        }
        let nrm = metric_pair(g, &w, &w);
        let pv = nrm.value();
        if pv.abs() < PIVOT_FLOOR {
            return Err(Error::DegenerateMetric { pivot: pv.abs() });
        }
        let s = pv.signum();
        let inv = nrm.scale(s).sqrt()?.recip()?;
        frame.push(w.iter().map(|x| x * &inv).collect());
        signs.push(s);
    }
    if signs != sig.chis() {
        return Err(Error::SignatureMismatch(format!(
            "frame signs {signs:?} do not match signature {sig}"
        )));
    }
    Ok(frame)
}

/// Frame, connection and curvature data around one point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub point: Vec<f64>,
    pub sig: Signature,
    pub chi: Vec<f64>,
    pub order: usize,
    pub x: Vec<RJet>,
    pub g: JetMat<f64>,
    /// `e[i][a]`: coordinate component `a` of `E_i`.
    pub e: JetMat<f64>,
    ec: Vec<Vec<CJet>>,
    /// `omega[i][j][k] = η(∇_{E_i} E_j, E_k)`
    pub omega: Vec<Vec<Vec<RJet>>>,
    curv: Option<Curvature>,
    /// `√|det η|`
    pub vol: RJet,
}

#[derive(Clone, Debug)]
pub struct Curvature {
    /// `riem[i][j][k][l] = η(R(E_i, E_j) E_k, E_l)`
    pub riem: Vec<Vec<Vec<Vec<RJet>>>>,
    pub ric: JetMat<f64>,
    pub scal: RJet,
}

impl PointGeometry {
    pub fn new(chart: &Chart, point: &[f64], order: usize) -> Result<Self> {
        let n = chart.dim();
        if point.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: point.len(),
            });
        }
        if order < 1 {
            return Err(Error::OrderExceeded {
                needed: 1,
                available: order,
            });
        }
        let x = RJet::seed(point, order);
        let g = chart.metric_at(&x);
        let e = chart.frame_at(&x, &g)?;
        let ec = e
            .iter()
            .map(|row| row.iter().map(|v| v.to_complex()).collect())
            .collect();
        let chi = chart.sig.chis();
        let det = determinant(&g)?;
        let vol = det.scale(det.value().signum()).sqrt()?;
        let mut geom = PointGeometry {
            point: point.to_vec(),
            sig: chart.sig,
            chi,
            order,
            x,
            g,
            e,
            ec,
            omega: Vec::new(),
            curv: None,
            vol,
        };
        geom.omega = geom.koszul();
        if order >= 2 {
            geom.curv = Some(geom.curvature_from_omega());
        }
        Ok(geom)
    }

    pub fn n(&self) -> usize {
        self.sig.n
    }

    /// `E_i(f)`
    pub fn dir(&self, i: usize, f: &RJet) -> RJet {
        let mut acc = &self.e[i][0] * &f.deriv(0);
        for a in 1..self.n() {
            acc += &(&self.e[i][a] * &f.deriv(a));
        }
        acc
    }

    /// `E_i(f)` for a complex jet.
    pub fn dir_c(&self, i: usize, f: &CJet) -> CJet {
        let mut acc = &self.ec[i][0] * &f.deriv(0);
        for a in 1..self.n() {
            acc += &(&self.ec[i][a] * &f.deriv(a));
        }
        acc
    }

    /// `[E_i, E_j]` in coordinate components.
    pub fn bracket(&self, i: usize, j: usize) -> Vec<RJet> {
        (0..self.n())
            .map(|c| &self.dir(i, &self.e[j][c]) - &self.dir(j, &self.e[i][c]))
            .collect()
    }

    fn koszul(&self) -> Vec<Vec<Vec<RJet>>> {
        let n = self.n();
        // c[i][j][k] = η([E_i, E_j], E_k)
        let mut c = vec![vec![vec![self.x[0].zero_like(); n]; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let b = self.bracket(i, j);
                for k in 0..n {
                    let v = metric_pair(&self.g, &b, &self.e[k]);
                    c[j][i][k] = -&v;
                    c[i][j][k] = v;
                }
            }
        }
        let mut w = vec![vec![vec![c[0][0][0].zero_like(); n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    w[i][j][k] = (&(&c[i][j][k] - &c[i][k][j]) - &c[j][k][i]).scale(0.5);
                }
            }
        }
        w
    }

    fn curvature_from_omega(&self) -> Curvature {
        let n = self.n();
        let chi = &self.chi;
        let om = &self.omega;
        let z = om[0][0][0].zero_like().truncate(self.order - 2);
        let mut riem = vec![vec![vec![vec![z.clone(); n]; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = &self.dir(i, &om[j][k][l]) - &self.dir(j, &om[i][k][l]);
                        for m in 0..n {
                            let quad = &(&om[j][k][m] * &om[i][m][l]) - &(&om[i][k][m] * &om[j][m][l]);
                            let tors = &(&om[i][j][m] - &om[j][i][m]) * &om[m][k][l];
                            acc += &(&quad - &tors).scale(chi[m]);
                        }
                        riem[i][j][k][l] = acc;
                    }
                }
            }
        }
        let mut ric = vec![vec![z.clone(); n]; n];
        for j in 0..n {
            for k in 0..n {
                let mut acc = z.clone();
                for i in 0..n {
                    acc += &riem[i][j][k][i].scale(chi[i]);
                }
                ric[j][k] = acc;
            }
        }
        let mut scal = z;
        for j in 0..n {
            scal += &ric[j][j].scale(chi[j]);
        }
        Curvature { riem, ric, scal }
    }

    pub fn curvature(&self) -> Result<&Curvature> {
        self.curv.as_ref().ok_or(Error::OrderExceeded {
            needed: 2,
            available: self.order,
        })
    }

    pub fn ric(&self) -> Result<&JetMat<f64>> {
        Ok(&self.curvature()?.ric)
    }

    pub fn scal(&self) -> Result<&RJet> {
        Ok(&self.curvature()?.scal)
    }

    /// `max |η(E_i, E_j) - χ(i) δ_ij|` at the point.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = metric_pair(&self.g, &self.e[i], &self.e[j]).value();
                let t = if i == j { self.chi[i] } else { 0.0 };
                worst = worst.max((v - t).abs());
            }
        }
        worst
    }

    /// `max |ω_ijk + ω_ikj|`
    pub fn metricity_residual(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.omega[i][j][k].value() + self.omega[i][k][j].value();
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// Metricity in terms of the raised coefficients `Γ_ij^k = χ(k) ω_ijk`:
    /// `max |Γ_ij^k χ(k) + Γ_ik^j χ(j)|`.
    pub fn raised_metricity_residual(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let gk = self.chi[k] * self.omega[i][j][k].value();
                    let gj = self.chi[j] * self.omega[i][k][j].value();
                    worst = worst.max((gk * self.chi[k] + gj * self.chi[j]).abs());
                }
            }
        }
        worst
    }

    /// Frame components of the coordinate vector `v`: `v^i = χ(i) η(v, E_i)`.
    pub fn frame_components(&self, v: &[RJet]) -> Vec<RJet> {
        (0..self.n())
            .map(|i| metric_pair(&self.g, v, &self.e[i]).scale(self.chi[i]))
            .collect()
    }

    /// Frame components `T(E_i, E_j)` of a coordinate-component tensor.
    pub fn to_frame(&self, t: &JetMat<f64>) -> JetMat<f64> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| metric_pair(t, &self.e[i], &self.e[j])).collect())
            .collect()
    }

    /// Coordinate components of the inverse metric `g^{ab} = Σ χ(i) E_i^a E_i^b`.
    pub fn inverse_metric(&self) -> JetMat<f64> {
        let n = self.n();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut acc = &self.e[0][a] * &self.e[0][b];
                        acc *= self.chi[0];
                        for i in 1..n {
                            acc += &(&self.e[i][a] * &self.e[i][b]).scale(self.chi[i]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(a: &JetMat<f64>) -> Result<RJet> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = a[0][0].lift(1.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].value().abs().total_cmp(&m[j][col].value().abs()))
            .expect("nonempty");
        if m[piv][col].value().abs() < 1e-14 {
            return Err(Error::DegenerateMetric {
                pivot: m[piv][col].value().abs(),
            });
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det = &det * &m[col][col];
        let r = m[col][col].recip()?;
        for i in col + 1..n {
            let f = &m[i][col] * &r;
            for j in col..n {
                let t = &f * &m[col][j];
                m[i][j] -= &t;
            }
        }
    }
    Ok(det)
}

/// Coordinate inverse metric by direct matrix inversion.
pub fn coordinate_inverse(g: &JetMat<f64>) -> Result<JetMat<f64>> {
    linalg::inverse(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn diagonal_rescale_frame() {
        let sig = Signature::new(2, 0).unwrap();
        let chart = Chart::new(
            "diag41",
            sig,
            vec![(0.0, 1.0); 2],
            Arc::new(|x: &[RJet]| {
                let z = x[0].zero_like();
                vec![vec![z.lift(4.0), z.clone()], vec![z.clone(), z.lift(1.0)]]
            }),
        );
        let geo = chart.geometry(&[0.3, 0.4], 2).unwrap();
        assert!((geo.e[0][0].value() - 0.5).abs() < 1e-15);
        assert!(geo.e[0][1].value().abs() < 1e-15);
        assert!((geo.e[1][1].value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_torus_identity_frame() {
        let chart = fixtures::flat_torus(2, 0).unwrap();
        let geo = chart.geometry(&[1.0, 2.0], 3).unwrap();
        for i in 0..2 {
            for a in 0..2 {
                let t = if i == a { 1.0 } else { 0.0 };
                assert_eq!(geo.e[i][a].value(), t);
            }
        }
        assert!(geo.omega.iter().flatten().flatten().all(|w| w.norm_max() == 0.0));
        assert_eq!(geo.scal().unwrap().value(), 0.0);
    }

    #[test]
    fn minkowski_frame_signs() {
        let chart = fixtures::minkowski(4).unwrap();
        let geo = chart.geometry(&[0.1, 0.2, 0.3, 0.4], 2).unwrap();
        assert_eq!(geo.chi, vec![1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn degenerate_metric_rejected() {
        let sig = Signature::new(2, 0).unwrap();
        let chart = Chart::new(
            "degenerate",
            sig,
            vec![(0.0, 1.0); 2],
            Arc::new(|x: &[RJet]| {
                let z = x[0].zero_like();
                vec![vec![z.lift(1.0), z.lift(1.0)], vec![z.lift(1.0), z.lift(1.0)]]
            }),
        );
        assert!(matches!(
            chart.geometry(&[0.1, 0.1], 2),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn curvature_needs_second_order() {
        let chart = fixtures::round_sphere(2, 1.0).unwrap();
        let geo = chart.geometry(&[1.0, 0.5], 1).unwrap();
        assert!(matches!(geo.ric(), Err(Error::OrderExceeded { .. })));
    }

    #[test]
    fn unit_sphere_scalar_curvature() {
        let chart = fixtures::round_sphere(2, 1.0).unwrap();
        for p in chart.sample_points(8, 1) {
            let geo = chart.geometry(&p, 2).unwrap();
            assert!((geo.scal().unwrap().value() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_covers_domain() {
        let chart = fixtures::flat_torus(2, 0).unwrap();
        let (pts, cell) = chart.grid(4);
        assert_eq!(pts.len(), 16);
        let total: f64 = cell * pts.len() as f64;
        assert!((total - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
