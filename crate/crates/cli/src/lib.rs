//! Command-line front end of `fisher-dirichlet`: geometry queries, geodesics,
//! means, curvature scans, figure reproduction and a validation suite.
//!
//! Every command turns a [`RunConfig`] into a [`Report`] of tables, a JSON
//! summary and optional SVG figures; [`main_with`] handles parsing, output
//! and exit codes.

pub mod commands;
pub mod config;
pub mod figures;
pub mod report;
pub mod svg;
pub mod validate;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

pub use config::{Cli, Command, Format, RunConfig};
pub use report::{Report, Table};

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "FISHER_DIRICHLET_WORKERS";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or arguments. Exit code 2.
    Usage(String),
    /// A numerical routine failed. Exit code 3.
    Numerical(fisher_dirichlet::Error),
    /// Plot data contained non-finite values. Exit code 3.
    Plot(svg::SvgError),
    /// Exit code 1.
    Io(String),
    /// `validate` found failing checks. Exit code 1.
    Validation { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Validation { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Plot(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numerical(_) => "numerical",
            CliError::Plot(_) => "plot",
            CliError::Io(_) => "io",
            CliError::Validation { .. } => "validation",
        }
    }

    /// Machine-readable record written to stderr.
    pub fn json(&self) -> Value {
        use fisher_dirichlet::Error as E;
        let detail = match self {
            CliError::Numerical(E::Domain { what, value }) => json!({ "what": what, "value": value }),
            CliError::Numerical(E::Consistency { residual }) => json!({ "residual": residual }),
            CliError::Numerical(E::Integration(f)) => json!({
                "failure": f.kind.to_string(),
                "time": f.time,
                "last-point": f.point,
                "last-velocity": f.velocity,
            }),
            CliError::Numerical(E::NoConvergence {
                what,
                iterations,
                residual,
                trace,
            }) => json!({ "what": what, "iterations": iterations, "best-residual": residual, "trace": trace }),
            CliError::Plot(svg::SvgError::NonFinite { indices }) => json!({ "indices": indices }),
            CliError::Validation { failed } => json!({ "failed-checks": failed }),
            _ => Value::Null,
        };
        json!({
            "error": {
                "kind": self.kind(),
                "exit-code": self.exit_code(),
                "message": self.to_string(),
                "detail": detail,
            }
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) => f.write_str(msg),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Plot(e) => write!(f, "{e}"),
            CliError::Validation { failed } => write!(f, "{failed} validation checks failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fisher_dirichlet::Error> for CliError {
    fn from(e: fisher_dirichlet::Error) -> CliError {
        match e {
            // Malformed input, not a numerical failure.
            fisher_dirichlet::Error::Usage(msg) => CliError::Usage(msg.to_string()),
            e => CliError::Numerical(e),
        }
    }
}

impl From<svg::SvgError> for CliError {
    fn from(e: svg::SvgError) -> CliError {
        CliError::Plot(e)
    }
}

/// Worker count from [`WORKERS_ENV`], if set.
pub fn worker_limit() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{WORKERS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Runs the configured command on a thread pool sized by [`WORKERS_ENV`].
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    let command = config
        .command
        .ok_or_else(|| CliError::Usage("no command given on the command line or in the config file".into()))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_limit()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    pool.install(|| commands::run(command, config))
}

/// Writes the primary output of `report` to `out` in `format`.
pub fn write_primary(report: &Report, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("stdout: {e}"));
    match format {
        Format::Csv => match (&report.text, report.tables.first()) {
            (Some(text), _) => out.write_all(text.as_bytes()).map_err(io),
            (None, Some(table)) => table.write_csv(out),
            (None, None) => writeln!(out, "{}", serde_json::to_string_pretty(&report.summary).unwrap()).map_err(io),
        },
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report.json()).unwrap()).map_err(io),
        Format::Svg => match report.figures.first() {
            Some((_, svg)) => out.write_all(svg.as_bytes()).map_err(io),
            None => Err(CliError::Usage(format!(
                "{} produces no figure; use --format csv or json",
                report.name
            ))),
        },
    }
}

fn run_with(args: Vec<OsString>, out: &mut dyn Write) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            write!(out, "{e}").map_err(|e| CliError::Io(e.to_string()))?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim_end().to_string())),
    };
    let config = cli.resolve()?;
    let report = execute(&config)?;
    let output = config
        .output
        .clone()
        .or_else(|| (config.command == Some(Command::Figures)).then(|| figures::DEFAULT_DIR.into()));
    match output {
        Some(dir) => {
            for path in report.write_dir(&dir)? {
                writeln!(out, "{path}").map_err(|e| CliError::Io(e.to_string()))?;
            }
            if let Some(text) = &report.text {
                out.write_all(text.as_bytes())
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        None => write_primary(&report, config.format.unwrap_or_default(), out)?,
    }
    match report.failed_checks {
        0 => Ok(()),
        failed => Err(CliError::Validation { failed }),
    }
}

/// Parses `args`, runs the command and reports errors as JSON on stderr.
pub fn main_with(args: impl IntoIterator<Item = impl Into<OsString>>) -> ExitCode {
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run_with(args, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{}", e.json());
            ExitCode::from(e.exit_code())
        }
    }
}
