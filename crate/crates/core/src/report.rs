//! Residual reports, diagnostics and the JSON run report.

use serde::{Deserialize, Serialize};

/// What a check expects of its per-point values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expect {
    /// every value below `tol`
    Vanish,
    /// at least `fraction` of the values above `tol`
    Exceed { fraction: f64 },
}

/// One residual check over a set of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub reference: String,
    #[serde(flatten)]
    pub expect: Expect,
    pub max_abs_residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub points: usize,
    pub per_point: Vec<f64>,
}

pub type ResidualReport = Check;

fn nan_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x.abs())
        }
    })
}

impl Check {
    pub fn vanish(name: &str, reference: &str, per_point: Vec<f64>, tol: f64) -> Self {
        let mut c = Check {
            name: name.to_string(),
            reference: reference.to_string(),
            expect: Expect::Vanish,
            max_abs_residual: 0.0,
            tol,
            pass: false,
            points: per_point.len(),
            per_point,
        };
        c.evaluate();
        c
    }

    pub fn scalar(name: &str, reference: &str, value: f64, tol: f64) -> Self {
        Self::vanish(name, reference, vec![value], tol)
    }

    /// Witness check: passes when at least `fraction` of the points exceed
    /// `threshold`.
    pub fn exceed(name: &str, reference: &str, per_point: Vec<f64>, threshold: f64, fraction: f64) -> Self {
        let mut c = Check {
            name: name.to_string(),
            reference: reference.to_string(),
            expect: Expect::Exceed { fraction },
            max_abs_residual: 0.0,
            tol: threshold,
            pass: false,
            points: per_point.len(),
            per_point,
        };
        c.evaluate();
        c
    }

    fn evaluate(&mut self) {
        self.max_abs_residual = nan_max(&self.per_point);
        self.pass = match self.expect {
            Expect::Vanish => !self.per_point.is_empty() && self.max_abs_residual < self.tol,
            Expect::Exceed { fraction } => {
                let hit = self.per_point.iter().filter(|x| x.abs() > self.tol).count();
                !self.per_point.is_empty() && hit as f64 >= fraction * self.per_point.len() as f64
            }
        };
    }

    /// Fraction of points above the tolerance.
    pub fn exceed_fraction(&self) -> f64 {
        if self.per_point.is_empty() {
            return 0.0;
        }
        self.per_point.iter().filter(|x| x.abs() > self.tol).count() as f64 / self.per_point.len() as f64
    }

    /// Replaces the tolerance of a vanishing check.
    pub fn with_tol(mut self, tol: f64) -> Self {
        if self.expect == Expect::Vanish {
            self.tol = tol;
            self.evaluate();
        }
        self
    }

    /// Appends the per-point values of another check with the same name.
    pub fn absorb(&mut self, other: Check) {
        self.per_point.extend(other.per_point);
        self.points = self.per_point.len();
        self.evaluate();
    }

    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match self.expect {
            Expect::Vanish => format!(
                "{verdict} {} max={:.3e} tol={:.1e} points={}",
                self.name, self.max_abs_residual, self.tol, self.points
            ),
            Expect::Exceed { fraction } => format!(
                "{verdict} {} above {:.1e} at {:.0}% of {} points (need {:.0}%)",
                self.name,
                self.tol,
                100.0 * self.exceed_fraction(),
                self.points,
                100.0 * fraction
            ),
        }
    }
}

/// Non-gating observation recorded next to the checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub observation: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Outcome {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, name: &str, observation: impl Into<String>, value: f64) {
        self.diagnostics.push(Diagnostic {
            name: name.to_string(),
            observation: observation.into(),
            value,
        });
    }

    pub fn extend(&mut self, o: Outcome) {
        self.checks.extend(o.checks);
        self.diagnostics.extend(o.diagnostics);
    }

    /// Like [`Outcome::extend`], but checks whose name is already present
    /// are merged into the existing entry.
    pub fn merge(&mut self, o: Outcome) {
        for c in o.checks {
            match self.checks.iter_mut().find(|x| x.name == c.name) {
                Some(x) => x.absorb(c),
                None => self.checks.push(c),
            }
        }
        for d in o.diagnostics {
            match self.diagnostics.iter_mut().find(|x| x.name == d.name) {
                Some(x) => x.value = x.value.max(d.value),
                None => self.diagnostics.push(d),
            }
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn diagnostic(&self, name: &str) -> Option<&Diagnostic> {
        self.diagnostics.iter().find(|d| d.name == name)
    }

    /// Overrides the tolerance of every vanishing check.
    pub fn override_tol(&mut self, tol: f64) {
        self.checks = std::mem::take(&mut self.checks)
            .into_iter()
            .map(|c| c.with_tol(tol))
            .collect();
    }

    /// Prefixes every check and diagnostic name.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        for c in &mut self.checks {
            c.name = format!("{prefix}.{}", c.name);
        }
        for d in &mut self.diagnostics {
            d.name = format!("{prefix}.{}", d.name);
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteDiagnostic {
    pub suite: String,
    #[serde(flatten)]
    pub diagnostic: Diagnostic,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: serde_json::Value,
    pub summary: Summary,
    pub suites: Vec<SuiteReport>,
    pub diagnostics: Vec<SuiteDiagnostic>,
}

impl RunReport {
    pub fn new(config: serde_json::Value, suites: Vec<(String, Outcome)>) -> Self {
        let mut report = RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            summary: Summary::default(),
            suites: Vec::new(),
            diagnostics: Vec::new(),
        };
        for (name, o) in suites {
            report.summary.checks += o.checks.len();
            report.summary.passed += o.checks.iter().filter(|c| c.pass).count();
            report
                .diagnostics
                .extend(o.diagnostics.into_iter().map(|d| SuiteDiagnostic {
                    suite: name.clone(),
                    diagnostic: d,
                }));
            report.suites.push(SuiteReport { name, checks: o.checks });
        }
        report.summary.failed = report.summary.checks - report.summary.passed;
        report
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.suites.iter().flat_map(|s| s.checks.iter())
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks().find(|c| c.name == name)
    }

    pub fn diagnostic(&self, name: &str) -> Option<&Diagnostic> {
        self.diagnostics.iter().map(|d| &d.diagnostic).find(|d| d.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanish_and_exceed() {
        let c = Check::vanish("a", "r", vec![1e-12, 3e-11], 1e-10);
        assert!(c.pass);
        assert_eq!(c.max_abs_residual, 3e-11);
        assert!(!c.clone().with_tol(1e-11).pass);
        let w = Check::exceed("w", "r", vec![1.0, 0.5, 1e-9, 2.0], 1e-2, 0.75);
        assert!(w.pass);
        assert!(!Check::exceed("w", "r", vec![1.0, 1e-9], 1e-2, 0.9).pass);
    }

    #[test]
    fn merge_concatenates() {
        let mut o = Outcome::default();
        o.push(Check::vanish("a", "r", vec![1e-12], 1e-10));
        let mut p = Outcome::default();
        p.push(Check::vanish("a", "r", vec![1.0], 1e-10));
        p.push(Check::vanish("b", "r", vec![0.0], 1e-10));
        o.merge(p);
        assert_eq!(o.checks.len(), 2);
        assert_eq!(o.checks[0].points, 2);
        assert!(!o.checks[0].pass);
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::vanish("a", "r", vec![0.0, f64::NAN], 1.0).pass);
    }
}
