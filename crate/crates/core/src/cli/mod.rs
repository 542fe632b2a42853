//! The `bures` command-line tool.
//!
//! Exit codes: 0 success, 1 failed check (or a numerical failure), 2 usage,
//! parse or dimension errors, 3 input not positive definite, 4 parameter
//! outside the exponential domain.

pub mod input;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::curvature::curvature_report;
use crate::error::Error;
use crate::geodesy::{geodesic_ivp, geodesic_point, log_map, radius};
use crate::invariants::{run_check, CheckConfig, DEFAULT_TOL};
use crate::matcore::{SpdMatrix, SymMatrix};
use crate::metric::distance;

use input::{read_matrix, rows, MatrixFile};

/// Environment variable overriding the algebraic tolerance of `check`.
pub const TOL_ENV: &str = "BURES_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_SPD: i32 = 3;
pub const EXIT_BOUNDARY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "bures", version, about = "Bures-Wasserstein geometry of SPD matrices")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance between two SPD matrices.
    Dist { a: PathBuf, b: PathBuf },
    /// Sample the minimal geodesic from A to B, one JSON record per line.
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Exponential map exp_A(t X).
    Exp {
        a: PathBuf,
        x: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Logarithm map log_A(B).
    Log { a: PathBuf, b: PathBuf },
    /// Curvature summary at A.
    Curvature { a: PathBuf },
    /// Run the seeded invariant suites.
    Check {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    NotSpd(String),
    Lib(Error),
    Check,
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::NotSpd(_) => EXIT_NOT_SPD,
            Failure::Check | Failure::Io(_) => EXIT_FAILURE,
            Failure::Lib(e) => match e {
                Error::NotSquare { .. } | Error::Dimension { .. } | Error::Validation(_) | Error::Range { .. } => {
                    EXIT_USAGE
                }
                Error::NotPositiveDefinite { .. } | Error::Degenerate(_) => EXIT_NOT_SPD,
                Error::Boundary { .. } => EXIT_BOUNDARY,
                Error::NotOrthogonal { .. } | Error::Numeric(_) | Error::Consistency(_) => EXIT_FAILURE,
            },
        }
    }
}

type CmdResult = Result<(), Failure>;

fn load_spd(path: &Path) -> Result<SpdMatrix, Failure> {
    let m = read_matrix(path).map_err(Failure::Usage)?;
    SpdMatrix::new(m).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Failure::NotSpd(format!("{}: {e}", path.display())),
        other => Failure::Lib(other),
    })
}

fn load_sym(path: &Path) -> Result<SymMatrix, Failure> {
    let m = read_matrix(path).map_err(Failure::Usage)?;
    Ok(SymMatrix::new(m)?)
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CmdResult {
    let line = serde_json::to_string(value).map_err(|e| Failure::Lib(Error::Numeric(e.to_string())))?;
    writeln!(out, "{line}")?;
    Ok(())
}

#[derive(Serialize)]
struct GeodesicRecord {
    t: f64,
    matrix: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    radius: f64,
}

fn cmd_dist(a: &Path, b: &Path, out: &mut dyn Write) -> CmdResult {
    let (a, b) = (load_spd(a)?, load_spd(b)?);
    writeln!(out, "{:.12}", distance(&a, &b)?)?;
    Ok(())
}

fn cmd_geodesic(a: &Path, b: &Path, samples: usize, out: &mut dyn Write) -> CmdResult {
    if samples < 2 {
        return Err(Failure::Usage(format!("--samples must be at least 2, got {samples}")));
    }
    let (a, b) = (load_spd(a)?, load_spd(b)?);
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            found: b.dim(),
        }
        .into());
    }
    let last = (samples - 1) as f64;
    for i in 0..samples {
        let t = i as f64 / last;
        let p = geodesic_point(&a, &b, t)?;
        let record = GeodesicRecord {
            t,
            matrix: rows(p.as_matrix()),
            eigenvalues: p.spectrum().eigenvalues().to_vec(),
            radius: radius(&p),
        };
        write_json(out, &record)?;
    }
    Ok(())
}

fn cmd_exp(a: &Path, x: &Path, t: f64, out: &mut dyn Write) -> CmdResult {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Failure::Usage(format!(
            "--t must be finite and non-negative, got {t} (negate X to go backwards)"
        )));
    }
    let (a, x) = (load_spd(a)?, load_sym(x)?);
    let p = geodesic_ivp(&a, &x, t)?;
    write_json(out, &MatrixFile::from_matrix(p.as_matrix()))
}

fn cmd_log(a: &Path, b: &Path, out: &mut dyn Write) -> CmdResult {
    let (a, b) = (load_spd(a)?, load_spd(b)?);
    let v = log_map(&a, &b)?;
    write_json(out, &MatrixFile::from_matrix(v.as_matrix()))
}

fn cmd_curvature(a: &Path, out: &mut dyn Write) -> CmdResult {
    let a = load_spd(a)?;
    write_json(out, &curvature_report(&a)?)
}

fn check_tolerance(env: Option<OsString>) -> Result<f64, Failure> {
    let Some(raw) = env else {
        return Ok(DEFAULT_TOL);
    };
    let text = raw.to_string_lossy();
    match text.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(Failure::Usage(format!("{TOL_ENV}: invalid tolerance '{text}'"))),
    }
}

fn cmd_check(n: usize, trials: usize, seed: u64, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    if n < 2 {
        return Err(Failure::Usage(format!("--n must be at least 2, got {n}")));
    }
    if trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let tol = check_tolerance(std::env::var_os(TOL_ENV))?;
    let report = run_check(&CheckConfig::new(n, trials, seed).with_tol(tol))?;
    write!(out, "{}", report.render())?;
    if report.passed() {
        Ok(())
    } else {
        for r in report.failures() {
            writeln!(err, "bures: check failed: {}/{}", r.suite.name(), r.property)?;
        }
        Err(Failure::Check)
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };

    let result = match &cli.command {
        Command::Dist { a, b } => cmd_dist(a, b, out),
        Command::Geodesic { a, b, samples } => cmd_geodesic(a, b, *samples, out),
        Command::Exp { a, x, t } => cmd_exp(a, x, *t, out),
        Command::Log { a, b } => cmd_log(a, b, out),
        Command::Curvature { a } => cmd_curvature(a, out),
        Command::Check { n, trials, seed } => cmd_check(*n, *trials, *seed, out, err),
    };
    let _ = out.flush();

    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Usage(msg) | Failure::NotSpd(msg) => {
                    let _ = writeln!(err, "bures: {msg}");
                }
                Failure::Lib(e) => {
                    let _ = writeln!(err, "bures: {e}");
                }
                Failure::Io(e) => {
                    let _ = writeln!(err, "bures: write failed: {e}");
                }
                Failure::Check => {}
            }
            f.exit_code()
        }
    }
}
