//! Acceptance gate: one line per criterion, run on the default configuration.
//!
//! Criteria 10 and 11 are expected to fail: the transported spinor of the
//! warped pipeline does not have constant length in the conformal metric,
//! and the imaginary Killing spinor of `H^3` has `T_1 = 0`, so its ED-I
//! Einstein residual is zero rather than large. The binary exits non-zero
//! when any criterion's status differs from its expectation, including an
//! expected failure that starts passing.

use std::process::ExitCode;

use edcheck::fixtures::Registry;
use edcheck::report::{Check, RunReport};
use edcheck::suites::{run, RunConfig};

const EXPECTED_FAIL: [u32; 2] = [10, 11];

struct Criterion {
    id: u32,
    title: &'static str,
    select: fn(&str) -> bool,
}

fn under(name: &str, suite: &str) -> bool {
    name.strip_prefix(suite).is_some_and(|r| r.starts_with('.'))
}

const CRITERIA: [Criterion; 11] = [
    Criterion {
        id: 1,
        title: "Clifford identities, 7 signatures x 100 draws",
        select: |n| under(n, "clifford"),
    },
    Criterion {
        id: 2,
        title: "Schrodinger-Lichnerowicz formula",
        select: |n| under(n, "spincalc") && n.ends_with(".lichnerowicz"),
    },
    Criterion {
        id: 3,
        title: "warped-product closed forms vs generic curvature",
        select: |n| under(n, "warped") && n.contains(".warped."),
    },
    Criterion {
        id: 4,
        title: "variation formulas, pointwise and integrated",
        select: |n| under(n, "variation") && (n.contains(".variation.") || n.ends_with("functional_scaling")),
    },
    Criterion {
        id: 5,
        title: "stationarity of both functionals for both operators",
        select: |n| under(n, "variation") && (n.contains(".stationarity.") || n.contains(".normalized_power.")),
    },
    Criterion {
        id: 6,
        title: "divergence identities and conservation laws",
        select: |n| {
            under(n, "equations") && (n.contains(".div.") || n.contains(".conservation.") || n.contains(".witness."))
        },
    },
    Criterion {
        id: 7,
        title: "conformal laws via two paths, 3 fixtures x 3 factors",
        select: |n| under(n, "conformal") && (n.contains(".conformal.") || n.contains(".curvature.")),
    },
    Criterion {
        id: 8,
        title: "weakly T-parallel transport on the conformal flat torus",
        select: |n| {
            under(n, "conformal")
                && (n.contains(".weak_parallel.") || n.contains(".transport.") || n.contains(".transported."))
        },
    },
    Criterion {
        id: 9,
        title: "WK-spinor construction on warped products",
        select: |n| under(n, "warped") && n.contains(".nu"),
    },
    Criterion {
        id: 10,
        title: "end-to-end warped pipeline",
        select: |n| under(n, "pipeline"),
    },
    Criterion {
        id: 11,
        title: "ED-II / ED-I separation on H^3",
        select: |n| n.starts_with("equations.H3."),
    },
];

struct Line {
    id: u32,
    title: String,
    pass: bool,
    detail: String,
}

fn judge(id: u32, title: &str, checks: &[&Check]) -> Line {
    let failed: Vec<&&Check> = checks.iter().filter(|c| !c.pass).collect();
    let pass = !checks.is_empty() && failed.is_empty();
    let detail = if checks.is_empty() {
        "no checks selected".to_string()
    } else if failed.is_empty() {
        let worst = checks
            .iter()
            .filter(|c| matches!(c.expect, edcheck::report::Expect::Vanish));
        let worst = worst.map(|c| c.max_abs_residual).fold(0.0, f64::max);
        format!("{} checks, worst vanishing residual {worst:.2e}", checks.len())
    } else {
        let names: Vec<String> = failed.iter().take(4).map(|c| c.line()).collect();
        format!("{}/{} failed: {}", failed.len(), checks.len(), names.join("; "))
    };
    Line {
        id,
        title: title.to_string(),
        pass,
        detail,
    }
}

/// Non-gating diagnostics, present and sensible: the length drift law holds,
/// the transport claims and the characteristic-function spread are recorded.
fn diagnostics(report: &RunReport) -> Line {
    let drift: Vec<&Check> = report
        .checks()
        .filter(|c| c.name.ends_with("rwp.length_drift_law"))
        .collect();
    let mut missing = Vec::new();
    let mut want = |name: &str| {
        if report.diagnostic(name).is_none() {
            missing.push(name.to_string());
        }
    };
    for fx in ["T2xR_exp", "T3xR_exp"] {
        for stage in [
            "transport.wtp.dirac_square",
            "transport.wtp.constant_length",
            "cled2.f_spread",
            "rwp.length_range",
        ] {
            want(&format!("pipeline.{fx}.{stage}"));
        }
    }
    want("conformal.T3_flat.closed.f2_spread");
    let spread = report
        .diagnostic("conformal.T3_flat.closed.f2_spread")
        .map_or(0.0, |d| d.value);
    let drift_ok = !drift.is_empty() && drift.iter().all(|c| c.pass);
    let pass = drift_ok && missing.is_empty() && spread > 1e-3;
    let worst = drift.iter().map(|c| c.max_abs_residual).fold(0.0, f64::max);
    let detail = format!(
        "drift law worst {worst:.2e} over {} fixtures, f_2 spread on closed torus {spread:.3}, missing notes: {}",
        drift.len(),
        if missing.is_empty() {
            "none".to_string()
        } else {
            missing.join(", ")
        }
    );
    Line {
        id: 12,
        title: "diagnostics report".into(),
        pass,
        detail,
    }
}

fn determinism(registry: &Registry) -> Line {
    let cfg = RunConfig {
        points: 4,
        grid: 16,
        ..RunConfig::default()
    };
    let a = run(&["all"], &cfg, registry).expect("cheap run").to_json();
    let b = run(&["all"], &cfg, registry).expect("cheap run").to_json();
    Line {
        id: 13,
        title: "determinism of repeated runs".into(),
        pass: a == b,
        detail: format!(
            "two runs of all suites at 4 points, grid 16: {} bytes, identical = {}",
            a.len(),
            a == b
        ),
    }
}

fn main() -> ExitCode {
    let registry = Registry::builtin();
    let report = run(&["all"], &RunConfig::default(), &registry).expect("default run");
    let checks: Vec<&Check> = report.checks().collect();

    let mut lines: Vec<Line> = CRITERIA
        .iter()
        .map(|c| {
            let sel: Vec<&Check> = checks.iter().copied().filter(|k| (c.select)(&k.name)).collect();
            judge(c.id, c.title, &sel)
        })
        .collect();
    lines.push(diagnostics(&report));
    lines.push(determinism(&registry));
    lines.sort_by_key(|l| l.id);

    let mut mismatches = 0;
    for l in &lines {
        let expected = !EXPECTED_FAIL.contains(&l.id);
        let tag = if l.pass { "PASS" } else { "FAIL" };
        let note = match (expected, l.pass) {
            (true, true) | (false, false) => "",
            (false, true) => "  [UNEXPECTED PASS]",
            (true, false) => "  [UNEXPECTED FAIL]",
        };
        if expected != l.pass {
            mismatches += 1;
        }
        let exp = if expected { "" } else { " (expected FAIL)" };
        println!("criterion {:>2} {tag}{exp}{note}: {} -- {}", l.id, l.title, l.detail);
    }
    let supporting: Vec<&Check> = checks
        .iter()
        .copied()
        .filter(|k| !CRITERIA.iter().any(|c| (c.select)(&k.name)))
        .collect();
    let bad = supporting.iter().filter(|c| !c.pass).count();
    println!("supporting checks: {} total, {bad} failed", supporting.len());
    for c in supporting.iter().filter(|c| !c.pass) {
        println!("  {}", c.line());
    }
    if bad > 0 {
        mismatches += 1;
    }

    if mismatches == 0 {
        println!("acceptance: every criterion matches its expected status");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {mismatches} mismatch(es)");
        ExitCode::FAILURE
    }
}
