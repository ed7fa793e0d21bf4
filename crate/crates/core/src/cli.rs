//! Command-line front end: `key = value` config files, CSV/JSON output and
//! the exit-code contract.
//!
//! Exit codes: 0 success, 1 internal failure, 2 unsolvable instance,
//! 3 config error, 4 verification failure under `--strict`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::GreenSpec;
use crate::phi::PhiSpec;
use crate::solver::{assemble, verify, Branch, ProblemConfig, SolutionField, VerificationReport};
use crate::temporal::TemporalConfig;

/// Environment variable overriding the significant digits written to CSV.
pub const DIGITS_ENV: &str = "CAPUTO_SERIES_DIGITS";
pub const DEFAULT_DIGITS: usize = 17;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_STRICT: i32 = 4;

#[derive(Debug, Clone, Parser)]
#[command(name = "caputo-series", version, about = "Series solution of a nonlocal conjugation problem with Caputo derivatives")]
pub struct Args {
    /// key = value config file
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory, created if missing
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Exit with code 4 if any verification threshold is exceeded
    #[arg(long)]
    pub strict: bool,
    /// Print the resolved config and exit without writing anything
    #[arg(long)]
    pub dry_run: bool,
    /// Caputo oracle resolution (steps per mode)
    #[arg(long, value_name = "K")]
    pub verify_steps: Option<usize>,
    /// Accepted for scripts; every run is deterministic
    #[arg(long)]
    pub seedless: bool,
}

const KEYS: &[&str] = &[
    "k",
    "m",
    "alpha",
    "beta",
    "a",
    "b",
    "phi",
    "phi_coefficients",
    "phi_index",
    "modes",
    "quad_order",
    "grid_nx",
    "grid_ny",
    "resonance_tol",
    "tol_pde",
    "tol_interface",
    "tol_nonlocal",
    "tol_closure",
    "verify_steps",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

/// Parses a config file. Keys not given keep their reference values; `#`
/// starts a comment.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let mut c = ProblemConfig::reference();
    let mut seen = BTreeSet::new();
    let mut family: Option<String> = None;
    let mut coefficients: Option<Vec<f64>> = None;
    let mut index: Option<usize> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
        match key {
            "k" => c.spec.k = num(key, value)?,
            "m" => c.spec.m = num(key, value)?,
            "alpha" => c.temporal.alpha = num(key, value)?,
            "beta" => c.temporal.beta = num(key, value)?,
            "a" => c.temporal.a = num(key, value)?,
            "b" => c.temporal.b = num(key, value)?,
            "phi" => family = Some(value.to_string()),
            "phi_coefficients" => {
                coefficients = Some(
                    value
                        .split(',')
                        .map(|s| num::<f64>(key, s.trim()))
                        .collect::<Result<_>>()?,
                )
            }
            "phi_index" => index = Some(num(key, value)?),
            "modes" => c.modes = num(key, value)?,
            "quad_order" => c.quad_order = num(key, value)?,
            "grid_nx" => c.grid_nx = num(key, value)?,
            "grid_ny" => c.grid_ny = num(key, value)?,
            "resonance_tol" => c.resonance_tol = Some(num(key, value)?),
            "tol_pde" => c.tolerances.pde = num(key, value)?,
            "tol_interface" => c.tolerances.interface = num(key, value)?,
            "tol_nonlocal" => c.tolerances.nonlocal = num(key, value)?,
            "tol_closure" => c.tolerances.closure = num(key, value)?,
            "verify_steps" => c.verify_steps = num(key, value)?,
            _ => unreachable!(),
        }
    }

    c.phi = match family.as_deref().unwrap_or("poly") {
        "poly" => {
            if index.is_some() {
                return Err(Error::Config("phi_index given for the poly family".to_string()));
            }
            PhiSpec::Poly {
                coefficients: coefficients.unwrap_or_else(|| vec![1.0]),
            }
        }
        "eigenmode" => {
            if coefficients.is_some() {
                return Err(Error::Config(
                    "phi_coefficients given for the eigenmode family".to_string(),
                ));
            }
            PhiSpec::Eigenmode {
                index: index.ok_or_else(|| Error::Config("eigenmode family needs phi_index".to_string()))?,
            }
        }
        other => return Err(Error::Config(format!("phi: unknown family '{other}'"))),
    };
    c.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(c)
}

/// Config as `key = value` lines; parsing the output gives the same config.
pub fn render_config(c: &ProblemConfig) -> String {
    let mut s = String::new();
    let GreenSpec { k, m } = c.spec;
    let TemporalConfig { alpha, beta, a, b } = c.temporal;
    let _ = writeln!(s, "k = {k}");
    let _ = writeln!(s, "m = {m:?}");
    let _ = writeln!(s, "alpha = {alpha:?}");
    let _ = writeln!(s, "beta = {beta:?}");
    let _ = writeln!(s, "a = {a:?}");
    let _ = writeln!(s, "b = {b:?}");
    match &c.phi {
        PhiSpec::Poly { coefficients } => {
            let list: Vec<String> = coefficients.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "phi = poly");
            let _ = writeln!(s, "phi_coefficients = {}", list.join(", "));
        }
        PhiSpec::Eigenmode { index } => {
            let _ = writeln!(s, "phi = eigenmode");
            let _ = writeln!(s, "phi_index = {index}");
        }
    }
    let _ = writeln!(s, "modes = {}", c.modes);
    let _ = writeln!(s, "quad_order = {}", c.quad_order);
    let _ = writeln!(s, "grid_nx = {}", c.grid_nx);
    let _ = writeln!(s, "grid_ny = {}", c.grid_ny);
    if let Some(t) = c.resonance_tol {
        let _ = writeln!(s, "resonance_tol = {t:?}");
    }
    let t = &c.tolerances;
    let _ = writeln!(s, "tol_pde = {:?}", t.pde);
    let _ = writeln!(s, "tol_interface = {:?}", t.interface);
    let _ = writeln!(s, "tol_nonlocal = {:?}", t.nonlocal);
    let _ = writeln!(s, "tol_closure = {:?}", t.closure);
    let _ = writeln!(s, "verify_steps = {}", c.verify_steps);
    s
}

/// Significant digits for CSV numbers, from the environment or 17.
pub fn output_digits() -> usize {
    std::env::var(DIGITS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|d| (1..=17).contains(d))
        .unwrap_or(DEFAULT_DIGITS)
}

fn sci(v: f64, digits: usize) -> String {
    format!("{:.*e}", digits - 1, v)
}

/// `solution.csv`: one line per grid point, rows from y = -a up to y = b.
pub fn solution_csv(field: &SolutionField, digits: usize) -> String {
    let mut s = String::from("x,y,branch,u\n");
    let last = field.x.len() - 1;
    for row in &field.rows {
        let y = sci(row.y, digits);
        for (i, (&x, &u)) in field.x.iter().zip(&row.values).enumerate() {
            let branch = if i == 0 || i == last {
                "boundary"
            } else {
                match row.branch {
                    Branch::Upper => "+",
                    Branch::Lower => "-",
                }
            };
            let _ = writeln!(s, "{},{y},{branch},{}", sci(x, digits), sci(u, digits));
        }
    }
    s
}

/// `modes.csv`: n, lambda, phi_n, delta_n, status.
pub fn modes_csv(field: &SolutionField, digits: usize) -> String {
    let mut s = String::from("n,lambda,phi_n,delta_n,status\n");
    for (i, m) in field.modes.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            i + 1,
            sci(m.lambda, digits),
            sci(m.phi_n, digits),
            sci(m.delta_n, digits),
            m.status
        );
    }
    s
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a ProblemConfig,
    passed: bool,
    failures: Vec<String>,
    verification: &'a VerificationReport,
}

pub fn report_json(config: &ProblemConfig, report: &VerificationReport) -> Result<String> {
    let failures = report.failures();
    let r = Report {
        config,
        passed: failures.is_empty(),
        failures,
        verification: report,
    };
    serde_json::to_string_pretty(&r).map_err(|e| Error::Io(e.to_string()))
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: ProblemConfig,
    /// Present unless `--dry-run`.
    pub report: Option<VerificationReport>,
    pub written: Vec<PathBuf>,
}

fn load(path: &Path) -> Result<ProblemConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Runs a parsed command line; the dry run prints the config to stdout.
pub fn run(args: &Args) -> Result<Outcome> {
    let mut config = load(&args.config)?;
    if let Some(steps) = args.verify_steps {
        config.verify_steps = steps;
        config.validate().map_err(|e| Error::Config(e.to_string()))?;
    }
    if args.dry_run {
        print!("{}", render_config(&config));
        return Ok(Outcome {
            config,
            report: None,
            written: Vec::new(),
        });
    }

    let field = assemble(&config)?;
    let report = verify(&field, &config)?;
    let digits = output_digits();

    fs::create_dir_all(&args.out)?;
    let files = [
        ("solution.csv", solution_csv(&field, digits)),
        ("modes.csv", modes_csv(&field, digits)),
        ("report.json", report_json(&config, &report)?),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = args.out.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(Outcome {
        config,
        report: Some(report),
        written,
    })
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error kind={} code={}: {}", e.kind(), e.exit_code(), e);
    e.exit_code()
}

/// Full entry point over an argument list; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("bad arguments");
            eprintln!("error kind=usage code={EXIT_CONFIG}: {first}");
            return EXIT_CONFIG;
        }
    };
    match run(&args) {
        Ok(out) => match out.report {
            None => EXIT_OK,
            Some(report) => {
                let failures = report.failures();
                for f in &failures {
                    eprintln!("warning: {f}");
                }
                println!(
                    "modes={} pde={:.3e} nonlocal={:.3e} interface={:.3e} out={}",
                    out.config.modes,
                    report.pde_residual_sup,
                    report.nonlocal_gap_sup,
                    report.conjugation_value_gap.max(report.conjugation_flux_gap),
                    args.out.display()
                );
                if args.strict && !failures.is_empty() {
                    eprintln!("error kind=verification code={EXIT_STRICT}: {} threshold(s) exceeded", failures.len());
                    EXIT_STRICT
                } else {
                    EXIT_OK
                }
            }
        },
        Err(e) => report_error(&e),
    }
}
