use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edcheck::fixtures::Registry;
use edcheck::report::RunReport;
use edcheck::suites::{self, RunConfig, SUITES};
use edcheck::Error;

#[derive(Parser)]
#[command(
    name = "edcheck",
    version,
    about = "Numerical checks for Einstein-Dirac systems on pseudo-Riemannian spin manifolds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one suite, or `all`
    Verify {
        suite: String,
        /// restrict fixture-based checks to one registry entry
        #[arg(long)]
        fixture: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the end-to-end chain on one warped fixture
    Pipeline {
        #[arg(default_value = "T2xR_exp")]
        fixture: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Inspect the fixture registry
    Fixtures {
        #[command(subcommand)]
        cmd: FixturesCmd,
        #[arg(long, global = true)]
        registry: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FixturesCmd {
    List,
    Show { name: String },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    points: usize,
    /// replaces the tolerance of every vanishing check
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// JSON report path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// extra fixture entries (JSON object or array)
    #[arg(long)]
    registry: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self, fixture: Option<String>) -> RunConfig {
        RunConfig {
            seed: self.seed,
            points: self.points,
            tol: self.tol,
            order: self.order,
            grid: self.grid,
            fixture,
        }
    }
}

/// Exit code 2: bad input of any kind.
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

fn load_registry(path: Option<&PathBuf>) -> Result<Registry, Usage> {
    let base = Registry::builtin();
    let Some(path) = path else { return Ok(base) };
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    Ok(base.with_entries(Registry::parse_entries(&text)?)?)
}

fn emit(report: &RunReport, out: Option<&PathBuf>) -> Result<ExitCode, Usage> {
    for c in report.checks() {
        eprintln!("{}", c.line());
    }
    for d in &report.diagnostics {
        eprintln!(
            "NOTE {}.{} = {:.3e}  ({})",
            d.suite, d.diagnostic.name, d.diagnostic.value, d.diagnostic.observation
        );
    }
    let s = &report.summary;
    eprintln!("{} checks, {} passed, {} failed", s.checks, s.passed, s.failed);
    let json = report.to_json();
    match out {
        Some(path) => std::fs::write(path, json).map_err(|e| Usage(format!("{}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(cli: Cli) -> Result<ExitCode, Usage> {
    match cli.cmd {
        Cmd::Verify { suite, fixture, run } => {
            if suite != "all" && !SUITES.contains(&suite.as_str()) {
                return Err(Usage(format!(
                    "unknown suite '{suite}'; expected one of {} or all",
                    SUITES.join(", ")
                )));
            }
            let registry = load_registry(run.registry.as_ref())?;
            let report = suites::run(&[suite.as_str()], &run.config(fixture), &registry)?;
            emit(&report, run.out.as_ref())
        }
        Cmd::Pipeline { fixture, run } => {
            let registry = load_registry(run.registry.as_ref())?;
            let report = suites::run_pipeline(&fixture, &run.config(None), &registry)?;
            emit(&report, run.out.as_ref())
        }
        Cmd::Fixtures { cmd, registry } => {
            let registry = load_registry(registry.as_ref())?;
            match cmd {
                FixturesCmd::List => {
                    for spec in &registry.specs {
                        println!("{:<18} {:?} n={} r={}", spec.name, spec.kind, spec.n, spec.r);
                    }
                }
                FixturesCmd::Show { name } => {
                    let spec = registry.get(&name)?;
                    let fx = spec.build()?;
                    println!("name:   {}", spec.name);
                    println!("kind:   {:?}", spec.kind);
                    println!("n:      {}", fx.chart.dim());
                    println!("r:      {}", fx.chart.sig.r);
                    println!("metric: {}", spec.metric_formula());
                    println!(
                        "params: {}",
                        serde_json::to_string(&spec.params).expect("params serialize")
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
