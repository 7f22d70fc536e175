//! Verification suites and the run configuration shared with the CLI.

mod algebra;
mod conformal;
mod equations;
mod pipeline;
mod variation;
mod warped;

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordModel;
use crate::error::{Error, Result};
use crate::fixtures::{Fixture, Registry};
use crate::report::{Outcome, RunReport};

pub const SUITES: [&str; 8] = [
    "clifford",
    "geometry",
    "spincalc",
    "equations",
    "variation",
    "conformal",
    "warped",
    "pipeline",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// sample points per fixture
    pub points: usize,
    /// replaces the tolerance of every vanishing check
    pub tol: Option<f64>,
    pub order: usize,
    /// quadrature grid size per axis for integral checks
    pub grid: usize,
    /// restricts fixture-based checks to one registry entry
    pub fixture: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            points: 32,
            tol: None,
            order: 4,
            grid: 64,
            fixture: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, registry: &Registry) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("points must be at least 1".into()));
        }
        if self.order < 2 {
            return Err(Error::Config(format!(
                "jet order must be at least 2, got {}",
                self.order
            )));
        }
        if self.grid < 8 || !self.grid.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid must be even and at least 8, got {}",
                self.grid
            )));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        if let Some(f) = &self.fixture {
            registry.get(f)?;
        }
        Ok(())
    }
}

/// Everything a suite needs: the configuration and the fixture registry.
pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub registry: &'a Registry,
}

impl Ctx<'_> {
    /// Whether a fixture passes the configured filter.
    pub fn wants(&self, name: &str) -> bool {
        self.cfg.fixture.as_deref().is_none_or(|f| f == name)
    }

    /// The named fixtures that pass the filter, built in order.
    pub fn fixtures(&self, names: &[&str]) -> Result<Vec<Fixture>> {
        names
            .iter()
            .filter(|n| self.wants(n))
            .map(|n| self.registry.build(n))
            .collect()
    }

    /// Seed for one sub-task, mixed from the run seed and a label.
    pub fn seed(&self, label: &str) -> u64 {
        // FNV-1a over the label
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^ self.cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }

    pub fn points(&self, fx: &Fixture, label: &str) -> Vec<Vec<f64>> {
        fx.chart
            .sample_points(self.cfg.points, self.seed(&format!("{}/{label}", fx.spec.name)))
    }

    pub fn order(&self, needed: usize) -> usize {
        self.cfg.order.max(needed)
    }

    pub fn model(&self, fx: &Fixture) -> Result<CliffordModel> {
        CliffordModel::build(fx.chart.sig)
    }
}

pub fn run_suite(name: &str, ctx: &Ctx) -> Result<Outcome> {
    let mut out = match name {
        "clifford" => algebra::clifford(ctx)?,
        "geometry" => algebra::geometry(ctx)?,
        "spincalc" => algebra::spincalc(ctx)?,
        "equations" => equations::run(ctx)?,
        "variation" => variation::run(ctx)?,
        "conformal" => conformal::run(ctx)?,
        "warped" => warped::run(ctx)?,
        "pipeline" => pipeline::run(ctx)?,
        other => return Err(Error::Config(format!("unknown suite '{other}'"))),
    };
    if let Some(t) = ctx.cfg.tol {
        out.override_tol(t);
    }
    Ok(out.prefixed(name))
}

/// Runs the named suites (`"all"` expands to every suite) in order.
pub fn run(names: &[&str], cfg: &RunConfig, registry: &Registry) -> Result<RunReport> {
    cfg.validate(registry)?;
    let ctx = Ctx { cfg, registry };
    let expanded: Vec<&str> = if names.contains(&"all") {
        SUITES.to_vec()
    } else {
        names.to_vec()
    };
    let mut suites = Vec::new();
    for name in expanded {
        suites.push((name.to_string(), run_suite(name, &ctx)?));
    }
    let config = serde_json::to_value(cfg).expect("config serializes");
    Ok(RunReport::new(config, suites))
}

/// The end-to-end pipeline on one warped fixture, as its own report.
pub fn run_pipeline(fixture: &str, cfg: &RunConfig, registry: &Registry) -> Result<RunReport> {
    cfg.validate(registry)?;
    let ctx = Ctx { cfg, registry };
    let mut out = pipeline::one(&ctx, &registry.build(fixture)?)?;
    if let Some(t) = cfg.tol {
        out.override_tol(t);
    }
    let config = serde_json::to_value(cfg).expect("config serializes");
    Ok(RunReport::new(
        config,
        vec![("pipeline".into(), out.prefixed("pipeline"))],
    ))
}
