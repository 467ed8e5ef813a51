//! `dunkl`: evaluate kernels, run ratio scans and verification suites.
//!
//! Exit codes: 0 pass, 2 invalid configuration, 3 numerical failure,
//! 4 scan band violation, 5 failed verification.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dunkl_core::estimates::{regression_check, scan_theorem, Theorem, BASELINE_SAMPLES, BASELINE_SEED};
use dunkl_core::kernels::{
    dyson, from_a1_basis, green_direct_with_tol, newton_with_tol, poisson_with_tol, to_a1_basis, w_invariant,
};
use dunkl_core::report::{fmt_f64, fmt_point, write_csv, ResidualRecord};
use dunkl_core::verify::{run_suite, Suite, SuiteConfig};
use dunkl_core::{Error, ExtendedValue, KernelKind, Params};
use serde::Serialize;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_SCAN: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Eval,
    Scan,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Basis {
    /// Coordinates in which the reflection flips `x_1`.
    Adapted,
    /// The `e_1 - e_2` presentation in `R^2`, where the reflection swaps the
    /// coordinates.
    A1,
}

#[derive(Debug, Parser)]
#[command(
    name = "dunkl",
    version,
    about = "Kernels, estimate scans and verification suites for the rank-one Dunkl Laplacian"
)]
struct Cli {
    #[arg(long, value_enum)]
    command: Command,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: f64,
    /// Kernel kind for `eval`.
    #[arg(long, default_value = "newton")]
    kernel: String,
    /// Theorem selector for `scan`.
    #[arg(long)]
    theorem: Option<String>,
    /// Suite name for `verify`.
    #[arg(long)]
    suite: Option<String>,
    /// Evaluation point, comma separated; repeat for several points.
    #[arg(long = "x", allow_hyphen_values = true)]
    x: Vec<String>,
    /// Source or boundary point, comma separated; repeat for several points.
    #[arg(long = "y", allow_hyphen_values = true)]
    y: Vec<String>,
    /// Sample count for `scan` and `verify`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative quadrature tolerance for `eval`.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to csv for `eval` and `scan`, json for `verify`.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum, default_value = "adapted")]
    basis: Basis,
    /// Exponent for the suites that take one.
    #[arg(long)]
    p: Option<f64>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ToleranceNotReached { .. }
            | Error::NonFinite { .. }
            | Error::SlowConvergence { .. }
            | Error::StencilOutsideRegion { .. }
            | Error::TooCloseToWall { .. } => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval => cmd_eval(&cli),
        Command::Scan => cmd_scan(&cli),
        Command::Verify => cmd_verify(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn output(cli: &Cli) -> Result<Box<dyn Write>, Failure> {
    match &cli.out {
        Some(path) => File::create(path)
            .map(|f| Box::new(f) as Box<dyn Write>)
            .map_err(|e| Failure::config(format!("cannot create {}: {e}", path.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_json<T: Serialize>(cli: &Cli, value: &T) -> Outcome {
    let mut out = output(cli)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::config(e.to_string()))?;
    writeln!(out).map_err(|e| Failure::config(e.to_string()))
}

fn parse_point(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| Failure::config(format!("bad coordinate '{c}' in point '{s}'"))))
        .collect()
}

fn parse_points(list: &[String], flag: &str) -> Result<Vec<Vec<f64>>, Failure> {
    if list.is_empty() {
        return Err(Failure::config(format!("--{flag} is required")));
    }
    list.iter().map(|s| parse_point(s)).collect()
}

/// Pairs `xs` with `ys`, broadcasting a single point against a list.
fn pair_up(xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> Result<Vec<(Vec<f64>, Vec<f64>)>, Failure> {
    match (xs.len(), ys.len()) {
        (a, b) if a == b => Ok(xs.into_iter().zip(ys).collect()),
        (1, _) => Ok(ys.into_iter().map(|y| (xs[0].clone(), y)).collect()),
        (_, 1) => Ok(xs.into_iter().map(|x| (x, ys[0].clone())).collect()),
        (a, b) => Err(Failure::config(format!("{a} x points cannot be paired with {b} y points"))),
    }
}

#[derive(Serialize)]
struct EvalRow {
    x: Vec<f64>,
    y: Vec<f64>,
    /// `None` for an infinite value.
    value: Option<f64>,
}

fn evaluate(
    kind: KernelKind,
    p: &Params,
    x: &[f64],
    y: &[f64],
    basis: Basis,
    tol: f64,
) -> dunkl_core::Result<ExtendedValue> {
    let convert = |z: &[f64], to_original: bool| -> dunkl_core::Result<Vec<f64>> {
        if z.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: z.len() });
        }
        Ok(if to_original { to_a1_basis(z).to_vec() } else { from_a1_basis(z).to_vec() })
    };
    if kind.is_dyson() {
        if p.d != 2 || p.k != 1.0 {
            return Err(Error::InvalidParams("Dyson kernels need d = 2, k = 1".into()));
        }
        return match basis {
            Basis::A1 => dyson(kind, x, y),
            Basis::Adapted => dyson(kind, &convert(x, true)?, &convert(y, true)?),
        };
    }
    let (x, y) = match basis {
        Basis::Adapted => (x.to_vec(), y.to_vec()),
        Basis::A1 => (convert(x, false)?, convert(y, false)?),
    };
    match kind {
        KernelKind::Newton => newton_with_tol(p, &x, &y, tol),
        KernelKind::Green => green_direct_with_tol(p, &x, &y, tol),
        KernelKind::Poisson => poisson_with_tol(p, &x, &y, tol).map(ExtendedValue::Finite),
        _ => w_invariant(kind, p, &x, &y),
    }
}

fn cmd_eval(cli: &Cli) -> Outcome {
    let p = Params::new(cli.d, cli.k)?;
    let kind: KernelKind = cli.kernel.parse()?;
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(Failure::config(format!("--tol must lie in (0, 1), got {}", cli.tol)));
    }
    let pairs = pair_up(parse_points(&cli.x, "x")?, parse_points(&cli.y, "y")?)?;
    let mut rows = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let v = evaluate(kind, &p, &x, &y, cli.basis, cli.tol).map_err(|e| {
            let f = Failure::from(e);
            Failure {
                message: format!("{kind} at x = ({}), y = ({}): {}", fmt_point(&x), fmt_point(&y), f.message),
                ..f
            }
        })?;
        rows.push(EvalRow { x, y, value: v.finite() });
    }
    match cli.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(cli, &rows),
        Format::Csv => {
            let records = rows.iter().map(|r| {
                vec![fmt_point(&r.x), fmt_point(&r.y), r.value.map(fmt_f64).unwrap_or_else(|| fmt_f64(f64::INFINITY))]
            });
            write_csv(output(cli)?, ["x", "y", "value"], records).map_err(Failure::from)
        }
    }
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    report: &'a dunkl_core::estimates::ScanReport,
    band: f64,
    baseline_band: Option<f64>,
    passed: bool,
}

fn cmd_scan(cli: &Cli) -> Outcome {
    let theorem: Theorem = cli.theorem.as_deref().ok_or_else(|| Failure::config("--theorem is required"))?.parse()?;
    let p = Params::new(cli.d, cli.k)?;
    let n = cli.n.unwrap_or(BASELINE_SAMPLES);
    if n == 0 {
        return Err(Failure::config("--n must be positive"));
    }
    let report = scan_theorem(theorem, &p, n, cli.seed.unwrap_or(BASELINE_SEED))?;
    let check = regression_check(&report, theorem);
    match cli.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(
            cli,
            &ScanOutput { report: &report, band: check.band, baseline_band: check.baseline_band, passed: check.passed },
        )?,
        Format::Csv => write_csv(output(cli)?, dunkl_core::estimates::ScanReport::CSV_HEADER, [report.csv_record()])?,
    }
    if check.passed {
        return Ok(());
    }
    let (x, y) = if report.ratio_max.is_finite() { &report.argmax } else { &report.argmin };
    Err(Failure {
        code: EXIT_SCAN,
        message: format!(
            "{theorem} band {} (baseline {}), {} failed evaluations; worst pair x = ({}), y = ({})",
            fmt_f64(check.band),
            check.baseline_band.map(fmt_f64).unwrap_or_else(|| "none".into()),
            report.failures,
            fmt_point(x),
            fmt_point(y)
        ),
    })
}

fn cmd_verify(cli: &Cli) -> Outcome {
    let suite: Suite = cli.suite.as_deref().ok_or_else(|| Failure::config("--suite is required"))?.parse()?;
    let mut cfg = SuiteConfig::new(suite, cli.d, cli.k);
    cfg.p_exp = cli.p;
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = run_suite(suite, &cfg)?;
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => write_json(cli, &report)?,
        Format::Csv => {
            write_csv(output(cli)?, ResidualRecord::CSV_HEADER, report.checks.iter().map(|c| c.csv_record()))?
        }
    }
    if report.passed {
        return Ok(());
    }
    let Some(worst) = report.worst_failure() else {
        return Err(Failure { code: EXIT_VERIFY, message: format!("{suite} ran no checks") });
    };
    Err(Failure {
        code: EXIT_VERIFY,
        message: format!(
            "{} failed: {} residual {} (tolerance {}) at ({})",
            suite,
            worst.check,
            fmt_f64(worst.residual),
            fmt_f64(worst.tolerance),
            fmt_point(&worst.point)
        ),
    })
}
