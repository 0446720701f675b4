//! `melnikov-lab`: batch driver for the scenarios of `melnikov-core`.

mod error;
mod output;
mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use melnikov_verify::{Bound, Check};
use serde::Serialize;
use serde_json::{json, Value};

use error::CliError;
use output::write_atomic;
use run::{Options, Outcome};
use scenario::Scenario;

/// Environment variable fixing the worker thread count.
const THREADS_VAR: &str = "MELNIKOV_THREADS";

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    FloquetScan,
    SolitonDemo,
    BaVerify,
    Evolve,
    VerifyAll,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::FloquetScan => "floquet-scan",
            Kind::SolitonDemo => "soliton-demo",
            Kind::BaVerify => "ba-verify",
            Kind::Evolve => "evolve",
            Kind::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Parser)]
#[command(version, about = "Run a scenario and write report.json plus data files")]
struct Args {
    kind: Kind,
    /// JSON scenario configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized property checks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also render SVG line plots next to the CSV files.
    #[arg(long)]
    svg: bool,
}

#[derive(Serialize)]
struct ToleranceEntry<'a> {
    check: &'a str,
    bound: Bound,
    tolerance: f64,
}

/// Deterministic report; wall-clock data goes to the timing sidecar.
#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    kind: &'static str,
    seed: u64,
    scenario: &'a Scenario,
    passed: bool,
    tolerances: Vec<ToleranceEntry<'a>>,
    checks: &'a [Check],
    calibration: &'a Option<Value>,
    results: &'a Value,
    outputs: Vec<String>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot configure {threads} threads: {e}")))
}

fn relative(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).unwrap_or(path).display().to_string()
}

fn execute(args: &Args) -> Result<bool, CliError> {
    configure_threads()?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;
    let scenario = Scenario::parse(args.kind.name(), &text)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let opts = Options { out: &args.out, svg: args.svg, seed: args.seed };
    let Outcome { checks, results, calibration, outputs, sections } = run::run(&scenario, &opts)?;
    let elapsed = clock.elapsed().as_secs_f64();

    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        kind: args.kind.name(),
        seed: args.seed,
        scenario: &scenario,
        passed,
        tolerances: checks
            .iter()
            .map(|c| ToleranceEntry { check: &c.name, bound: c.bound, tolerance: c.tolerance })
            .collect(),
        checks: &checks,
        calibration: &calibration,
        results: &results,
        outputs: outputs.iter().map(|p| relative(p, &args.out)).collect(),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report is serializable");
    text.push('\n');
    write_atomic(&args.out.join("report.json"), text.as_bytes())?;

    let sections: Vec<Value> = sections.iter().map(|(name, s)| json!({ "section": name, "elapsed_s": s })).collect();
    let timing = json!({ "started_unix_s": started, "elapsed_s": elapsed, "sections": sections });
    let mut text = serde_json::to_string_pretty(&timing).expect("timing is serializable");
    text.push('\n');
    write_atomic(&args.out.join("timing.json"), text.as_bytes())?;

    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!("failed: {} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance);
    }
    println!(
        "{} {}: {} ({} checks)",
        args.kind.name(),
        if passed { "PASS" } else { "FAIL" },
        args.out.display(),
        checks.len()
    );
    Ok(passed)
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
