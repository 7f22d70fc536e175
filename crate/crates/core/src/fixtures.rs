//! Builtin charts and the declarative fixture registry.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clifford::Signature;
use crate::error::{Error, Result};
use crate::geometry::{Chart, TensorFn};
use crate::jet::RJet;
use crate::linalg::JetMat;
use crate::warped::{WarpedSpec, Warping};

fn diag(x: &[RJet], entries: Vec<RJet>) -> JetMat<f64> {
    let n = entries.len();
    let z = x[0].zero_like();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { entries[i].clone() } else { z.clone() })
                .collect()
        })
        .collect()
}

fn flat_metric(sig: Signature) -> TensorFn {
    let chis = sig.chis();
    Arc::new(move |x: &[RJet]| {
        let e = chis.iter().map(|&c| x[0].lift(c)).collect();
        diag(x, e)
    })
}

/// Flat torus `[0, 2π)^n` with `r` timelike directions.
pub fn flat_torus(n: usize, r: usize) -> Result<Chart> {
    let sig = Signature::new(n, r)?;
    Ok(Chart::new(format!("T{n}_flat"), sig, vec![(0.0, 2.0 * PI); n], flat_metric(sig)).periodic(true))
}

pub fn flat_euclidean(n: usize) -> Result<Chart> {
    let sig = Signature::new(n, 0)?;
    Ok(Chart::new(
        format!("R{n}_flat"),
        sig,
        vec![(-1.0, 1.0); n],
        flat_metric(sig),
    ))
}

/// Minkowski space with the time coordinate last.
pub fn minkowski(n: usize) -> Result<Chart> {
    let sig = Signature::new(n, 1)?;
    Ok(Chart::new(
        format!("Mink{n}"),
        sig,
        vec![(-1.0, 1.0); n],
        flat_metric(sig),
    ))
}

/// Round sphere of radius `radius` in polar coordinates, away from the poles.
pub fn round_sphere(n: usize, radius: f64) -> Result<Chart> {
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidFixture(format!(
            "sphere fixtures exist for n = 2, 3, not {n}"
        )));
    }
    if radius <= 0.0 {
        return Err(Error::InvalidFixture(format!("radius must be positive, got {radius}")));
    }
    let sig = Signature::new(n, 0)?;
    let r2 = radius * radius;
    let metric = Arc::new(move |x: &[RJet]| {
        let mut entries = vec![x[0].lift(r2)];
        let mut prod = x[0].lift(r2);
        for xa in x.iter().take(n - 1) {
            let s = xa.sin();
            prod = &prod * &(&s * &s);
            entries.push(prod.clone());
        }
        diag(x, entries)
    });
    let mut domain = vec![(0.5, 2.6); n - 1];
    domain.push((0.0, 2.0 * PI));
    Ok(Chart::new(format!("S{n}"), sig, domain, metric))
}

type Quat = [RJet; 4];

fn qmul(a: &Quat, b: &Quat) -> Quat {
    [
        &(&(&a[0] * &b[0]) - &(&a[1] * &b[1])) - &(&(&a[2] * &b[2]) + &(&a[3] * &b[3])),
        &(&(&a[0] * &b[1]) + &(&a[1] * &b[0])) + &(&(&a[2] * &b[3]) - &(&a[3] * &b[2])),
        &(&(&a[0] * &b[2]) + &(&a[2] * &b[0])) + &(&(&a[3] * &b[1]) - &(&a[1] * &b[3])),
        &(&(&a[0] * &b[3]) + &(&a[3] * &b[0])) + &(&(&a[1] * &b[2]) - &(&a[2] * &b[1])),
    ]
}

/// Unit `S^3` in Hopf coordinates `(η, ξ1, ξ2)`,
/// `q = (cos η cos ξ1, cos η sin ξ1, sin η cos ξ2, sin η sin ξ2)`, with the
/// left-invariant frame `q ↦ q·i, q·j, q·k`.
pub fn sphere3_left_invariant() -> Result<Chart> {
    let sig = Signature::new(3, 0)?;
    let metric = Arc::new(|x: &[RJet]| {
        let c = x[0].cos();
        let s = x[0].sin();
        diag(x, vec![x[0].lift(1.0), &c * &c, &s * &s])
    });
    let frame = Arc::new(|x: &[RJet], _g: &JetMat<f64>| -> Result<JetMat<f64>> {
        let (ce, se) = (x[0].cos(), x[0].sin());
        let (c1, s1) = (x[1].cos(), x[1].sin());
        let (c2, s2) = (x[2].cos(), x[2].sin());
        let z = x[0].zero_like();
        let q: Quat = [&ce * &c1, &ce * &s1, &se * &c2, &se * &s2];
        let dq: [Quat; 3] = [
            [-(&se * &c1), -(&se * &s1), &ce * &c2, &ce * &s2],
            [-(&ce * &s1), &ce * &c1, z.clone(), z.clone()],
            [z.clone(), z.clone(), -(&se * &s2), &se * &c2],
        ];
        let ginv = [x[0].lift(1.0), (&ce * &ce).recip()?, (&se * &se).recip()?];
        let units: [Quat; 3] = [1, 2, 3].map(|k| {
            let mut u: Quat = [z.clone(), z.clone(), z.clone(), z.clone()];
            u[k] = z.lift(1.0);
            u
        });
        Ok(units
            .iter()
            .map(|u| {
                let qe = qmul(&q, u);
                (0..3)
                    .map(|a| {
                        let mut dot = &dq[a][0] * &qe[0];
                        for m in 1..4 {
                            dot += &(&dq[a][m] * &qe[m]);
                        }
                        &ginv[a] * &dot
                    })
                    .collect()
            })
            .collect())
    });
    let domain = vec![(0.3, 1.2), (0.0, 2.0 * PI), (0.0, 2.0 * PI)];
    Ok(Chart::new("S3_hopf", sig, domain, metric).with_frame(frame))
}

/// Upper half-space model `δ / z^2`, with `z` the last coordinate.
pub fn hyperbolic(n: usize) -> Result<Chart> {
    let sig = Signature::new(n, 0)?;
    let metric = Arc::new(move |x: &[RJet]| {
        let w = x[n - 1].powi(2).recip().expect("z > 0 on the domain");
        diag(x, vec![w; n])
    });
    let mut domain = vec![(-1.0, 1.0); n - 1];
    domain.push((0.5, 2.0));
    Ok(Chart::new(format!("H{n}"), sig, domain, metric))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureKind {
    Torus,
    Euclidean,
    Sphere,
    Hyperbolic,
    Minkowski,
    Warped,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FixtureParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Warping function: "exp" (`A = e^{λt}`, coef = [λ]) or "power"
    /// (`A = (αt + β)^μ`, coef = [α, β, μ]).
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coef: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_last: Option<f64>,
    /// "left_invariant" selects the Hopf-coordinate `S^3` chart.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
}

/// One registry entry. For warped fixtures `n` is the base dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub name: String,
    pub kind: FixtureKind,
    pub n: usize,
    pub r: usize,
    #[serde(default)]
    pub params: FixtureParams,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub spec: FixtureSpec,
    pub chart: Chart,
    pub warped: Option<WarpedSpec>,
}

impl FixtureSpec {
    fn new(name: &str, kind: FixtureKind, n: usize, r: usize, params: FixtureParams) -> Self {
        FixtureSpec {
            name: name.to_string(),
            kind,
            n,
            r,
            params,
        }
    }

    pub fn warped_spec(&self) -> Result<WarpedSpec> {
        let p = &self.params;
        let chi_last = p.chi_last.unwrap_or(1.0);
        if chi_last != 1.0 && chi_last != -1.0 {
            return Err(Error::InvalidFixture(format!("chi_last must be ±1, got {chi_last}")));
        }
        let expected_r = usize::from(chi_last < 0.0);
        if self.r != expected_r {
            return Err(Error::InvalidFixture(format!(
                "warped fixture '{}' has r = {} but chi_last = {chi_last}",
                self.name, self.r
            )));
        }
        let coef = p.coef.clone().unwrap_or_default();
        let warping = match p.a.as_deref().unwrap_or("exp") {
            "exp" => Warping::Exp {
                lambda: coef.first().copied().unwrap_or(1.0),
            },
            "power" => {
                let c = |i: usize, d: f64| coef.get(i).copied().unwrap_or(d);
                Warping::Power {
                    alpha: c(0, 1.0),
                    beta: c(1, 2.0),
                    mu: c(2, 2.0),
                }
            }
            other => return Err(Error::InvalidFixture(format!("unknown warping '{other}'"))),
        };
        let spec = WarpedSpec {
            n: self.n,
            warping,
            p: p.p.unwrap_or((self.n as f64 + 1.0) / 2.0),
            chi_last,
            t_range: (-1.0, 1.0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn build(&self) -> Result<Fixture> {
        let n = self.n;
        let (chart, warped) = match self.kind {
            FixtureKind::Torus => (flat_torus(n, self.r)?, None),
            FixtureKind::Euclidean => {
                self.require_r(0)?;
                (flat_euclidean(n)?, None)
            }
            FixtureKind::Minkowski => {
                self.require_r(1)?;
                (minkowski(n)?, None)
            }
            FixtureKind::Hyperbolic => {
                self.require_r(0)?;
                (hyperbolic(n)?, None)
            }
            FixtureKind::Sphere => {
                self.require_r(0)?;
                match self.params.frame.as_deref() {
                    Some("left_invariant") => {
                        if n != 3 || self.params.radius.is_some_and(|r| r != 1.0) {
                            return Err(Error::InvalidFixture(
                                "the left-invariant frame exists on the unit 3-sphere only".into(),
                            ));
                        }
                        (sphere3_left_invariant()?, None)
                    }
                    None | Some("gram_schmidt") => (round_sphere(n, self.params.radius.unwrap_or(1.0))?, None),
                    Some(other) => return Err(Error::InvalidFixture(format!("unknown frame '{other}'"))),
                }
            }
            FixtureKind::Warped => {
                let w = self.warped_spec()?;
                (w.chart()?, Some(w))
            }
        };
        Ok(Fixture {
            spec: self.clone(),
            chart: chart.renamed(self.name.clone()),
            warped,
        })
    }

    fn require_r(&self, r: usize) -> Result<()> {
        if self.r != r {
            return Err(Error::InvalidFixture(format!(
                "{:?} fixture '{}' needs r = {r}, got {}",
                self.kind, self.name, self.r
            )));
        }
        Ok(())
    }

    /// Human-readable metric formula.
    pub fn metric_formula(&self) -> String {
        let n = self.n;
        match self.kind {
            FixtureKind::Torus | FixtureKind::Euclidean | FixtureKind::Minkowski => {
                let sig = Signature { n, r: self.r };
                let terms: Vec<String> = (0..n)
                    .map(|i| format!("{}dx{}^2", if sig.chi(i) < 0.0 { "-" } else { "+" }, i + 1))
                    .collect();
                format!("flat: {}", terms.join(" "))
            }
            FixtureKind::Sphere => {
                let r = self.params.radius.unwrap_or(1.0);
                if self.params.frame.as_deref() == Some("left_invariant") {
                    "deta^2 + cos^2(eta) dxi1^2 + sin^2(eta) dxi2^2, left-invariant frame".into()
                } else if n == 2 {
                    format!("{r}^2 (dth^2 + sin^2(th) dph^2)")
                } else {
                    format!("{r}^2 (da^2 + sin^2(a) db^2 + sin^2(a) sin^2(b) dc^2)")
                }
            }
            FixtureKind::Hyperbolic => format!("(dx1^2 + ... + dx{n}^2) / x{n}^2"),
            FixtureKind::Warped => match self.warped_spec() {
                Ok(w) => w.describe(),
                Err(e) => format!("invalid: {e}"),
            },
        }
    }
}

pub fn builtin_specs() -> Vec<FixtureSpec> {
    use FixtureKind::*;
    let none = FixtureParams::default;
    let warped = |a: &str, coef: Vec<f64>, p: f64, chi: f64| FixtureParams {
        a: Some(a.to_string()),
        coef: Some(coef),
        p: Some(p),
        chi_last: Some(chi),
        ..Default::default()
    };
    vec![
        FixtureSpec::new("T2_flat", Torus, 2, 0, none()),
        FixtureSpec::new("T3_flat", Torus, 3, 0, none()),
        FixtureSpec::new("T21_flat", Torus, 3, 1, none()),
        FixtureSpec::new("R2_flat", Euclidean, 2, 0, none()),
        FixtureSpec::new("R3_flat", Euclidean, 3, 0, none()),
        FixtureSpec::new("S2", Sphere, 2, 0, none()),
        FixtureSpec::new("S3", Sphere, 3, 0, none()),
        FixtureSpec::new(
            "S3_hopf",
            Sphere,
            3,
            0,
            FixtureParams {
                frame: Some("left_invariant".into()),
                ..Default::default()
            },
        ),
        FixtureSpec::new("H2", Hyperbolic, 2, 0, none()),
        FixtureSpec::new("H3", Hyperbolic, 3, 0, none()),
        FixtureSpec::new("Mink2", Minkowski, 2, 1, none()),
        FixtureSpec::new("Mink4", Minkowski, 4, 1, none()),
        FixtureSpec::new("T2xR_exp", Warped, 2, 0, warped("exp", vec![1.0], 1.5, 1.0)),
        FixtureSpec::new("T2xR_exp_lorentz", Warped, 2, 1, warped("exp", vec![1.0], 1.5, -1.0)),
        FixtureSpec::new("T3xR_exp", Warped, 3, 0, warped("exp", vec![1.0], 2.0, 1.0)),
        FixtureSpec::new("T3xR_exp_lorentz", Warped, 3, 1, warped("exp", vec![1.0], 2.0, -1.0)),
        FixtureSpec::new("T2xR_wk", Warped, 2, 0, warped("exp", vec![1.0], 1.0, 1.0)),
        FixtureSpec::new("T2xR_wk_lorentz", Warped, 2, 1, warped("exp", vec![1.0], 1.0, -1.0)),
        FixtureSpec::new("T3xR_wk", Warped, 3, 0, warped("exp", vec![1.0], 1.5, 1.0)),
        FixtureSpec::new("T3xR_wk_lorentz", Warped, 3, 1, warped("exp", vec![1.0], 1.5, -1.0)),
        FixtureSpec::new("T2xR_pow", Warped, 2, 0, warped("power", vec![1.0, 2.0, 2.0], 1.0, 1.0)),
    ]
}

/// Fixture lookup over the builtins plus optional extra entries, the
/// latter taking precedence on name clashes.
#[derive(Clone, Debug)]
pub struct Registry {
    pub specs: Vec<FixtureSpec>,
}

impl Registry {
    pub fn builtin() -> Self {
        Registry { specs: builtin_specs() }
    }

    /// Parses a JSON document holding either one entry or an array of them.
    pub fn parse_entries(json: &str) -> Result<Vec<FixtureSpec>> {
        let value: serde_json::Value =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("registry JSON: {e}")))?;
        let list = match value {
            serde_json::Value::Array(items) => items,
            other => vec![other],
        };
        list.into_iter()
            .map(|v| serde_json::from_value(v).map_err(|e| Error::Config(format!("registry entry: {e}"))))
            .collect()
    }

    pub fn with_entries(mut self, extra: Vec<FixtureSpec>) -> Result<Self> {
        for spec in extra {
            spec.build()?;
            self.specs.retain(|s| s.name != spec.name);
            self.specs.push(spec);
        }
        Ok(self)
    }

    pub fn names(&self) -> Vec<&str> {
        self.specs.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&FixtureSpec> {
        self.specs
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownFixture(name.to_string()))
    }

    pub fn build(&self, name: &str) -> Result<Fixture> {
        self.get(name)?.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_builds() {
        for spec in builtin_specs() {
            let fx = spec.build().unwrap_or_else(|e| panic!("{}: {e}", spec.name));
            let p = fx.chart.sample_points(1, 0).remove(0);
            fx.chart.geometry(&p, 2).unwrap();
        }
    }

    #[test]
    fn registry_round_trip() {
        let specs = builtin_specs();
        let json = serde_json::to_string(&specs).unwrap();
        let back = Registry::parse_entries(&json).unwrap();
        assert_eq!(specs, back);
    }

    #[test]
    fn parse_single_entry() {
        let json = r#"{"name":"W","kind":"warped","n":2,"r":1,
            "params":{"A":"exp","coef":[0.5],"p":1.5,"chi_last":-1}}"#;
        let e = Registry::parse_entries(json).unwrap();
        let reg = Registry::builtin().with_entries(e).unwrap();
        let fx = reg.build("W").unwrap();
        assert_eq!(fx.chart.sig, Signature { n: 3, r: 1 });
    }

    #[test]
    fn inconsistent_entries_rejected() {
        let json = r#"{"name":"bad","kind":"warped","n":2,"r":0,"params":{"chi_last":-1}}"#;
        let e = Registry::parse_entries(json).unwrap();
        assert!(Registry::builtin().with_entries(e).is_err());
        assert!(matches!(
            Registry::builtin().build("nope"),
            Err(Error::UnknownFixture(_))
        ));
        assert!(Registry::parse_entries("{").is_err());
    }
}
