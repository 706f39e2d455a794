//! Run configuration: command-line flags merged over an optional JSON file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use fisher_dirichlet::Family;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Metric, inverse and smallest eigenvalue at a point.
    Metric,
    /// Geodesic from a point and an initial velocity.
    Geodesic,
    /// Geodesic between two points (logarithm map), with beta densities in 2D.
    Connect,
    /// Geodesic distance between two points.
    Distance,
    /// Weighted Fréchet mean of a set of points.
    Mean,
    /// Two-dimensional curvature on a grid.
    CurvatureGrid,
    /// Minkowski-space image of a point, unit normal and principal curvatures.
    Embed,
    /// Diagonal geodesic in two dimensions by quadrature.
    Diagonal,
    /// Invariant checks of every module.
    Validate,
    /// Geodesic balls, curvature, interpolation, means and the K₃ − K₂ map.
    Figures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Metric => "metric",
            Command::Geodesic => "geodesic",
            Command::Connect => "connect",
            Command::Distance => "distance",
            Command::Mean => "mean",
            Command::CurvatureGrid => "curvature-grid",
            Command::Embed => "embed",
            Command::Diagonal => "diagonal",
            Command::Validate => "validate",
            Command::Figures => "figures",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    /// f = 1/ψ′.
    #[default]
    Trigamma,
    /// f(x) = x − 1/2 + 1/(2(2x² + 2x + 1)).
    Rational,
}

impl From<FamilyName> for Family {
    fn from(f: FamilyName) -> Family {
        match f {
            FamilyName::Trigamma => Family::Trigamma,
            FamilyName::Rational => Family::Rational,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    #[default]
    Log,
    Linear,
}

/// A closed interval written `lo:hi` on the command line and `[lo, hi]` in
/// JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Span {
    fn from([lo, hi]: [f64; 2]) -> Span {
        Span { lo, hi }
    }
}

impl From<Span> for [f64; 2] {
    fn from(s: Span) -> [f64; 2] {
        [s.lo, s.hi]
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Span, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Span {
            lo: parse(lo)?,
            hi: parse(hi)?,
        })
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Parses a comma-separated list of reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect()
}

/// Every setting of a run. Absent fields take command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<Span>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub res: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scale>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xdot0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr; $($field:ident),* $(,)?) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    /// Fields set in `top` replace those of `self`.
    pub fn overlaid_with(self, top: RunConfig) -> RunConfig {
        overlay!(self, top;
            command, family, dimension, point, velocity, from, to, points, weights, time,
            samples, tol, max_iterations, range, res, scale, z, x0, xdot0, centers, radii,
            seed, output, format,
        )
    }

    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn family(&self) -> Family {
        self.family.unwrap_or_default().into()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fisher-dirichlet",
    version,
    about = "Fisher-Rao geometry of beta and Dirichlet distributions",
    after_help = "Lists of reals are comma-separated (--point 2,5); point sets separate points \
                  with ';' or repeat the flag (--points '2,5;2,2'). Flags override values from \
                  --config. Without --output the primary table is written to stdout in --format; \
                  with --output DIR every table, summary and figure is written to DIR.\n\n\
                  Exit status: 0 success, 1 I/O failure or failed validation, 2 usage error, \
                  3 numerical failure. Errors are reported on stderr as JSON.\n\n\
                  FISHER_DIRICHLET_WORKERS caps the number of worker threads."
)]
pub struct Cli {
    /// Command to run; may also be given as "command" in the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON file with any of the settings below (kebab-case keys).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Dimension n; checked against given points, and sets the default point (1, …, 1).
    #[arg(long)]
    pub dimension: Option<usize>,
    /// Point x₁,…,xₙ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<f64>>,
    /// Initial velocity for `geodesic`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub velocity: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub from: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub to: Option<Vec<f64>>,
    /// Points for `mean`.
    #[arg(long, value_parser = parse_list, value_delimiter = ';')]
    pub points: Option<Vec<Vec<f64>>>,
    /// Positive weights for `mean`.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Integration time.
    #[arg(long, allow_hyphen_values = true)]
    pub time: Option<f64>,
    /// Number of samples along a path.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Solver tolerance (shooting residual, mean gradient norm).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Grid range lo:hi.
    #[arg(long)]
    pub range: Option<Span>,
    /// Grid resolution per axis.
    #[arg(long)]
    pub res: Option<usize>,
    /// Grid spacing.
    #[arg(long, value_enum)]
    pub scale: Option<Scale>,
    /// Third coordinate of the K₃ − K₂ map.
    #[arg(long)]
    pub z: Option<f64>,
    /// Diagonal start x₀.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Diagonal start velocity ẋ₀.
    #[arg(long, allow_hyphen_values = true)]
    pub xdot0: Option<f64>,
    /// Geodesic ball centers for the figures.
    #[arg(long, value_parser = parse_list, value_delimiter = ';')]
    pub centers: Option<Vec<Vec<f64>>>,
    /// Geodesic ball radii for the figures.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Seed of the random checks in `validate`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Cli {
    /// The flags as a config, without reading `--config`.
    pub fn flags(&self) -> RunConfig {
        RunConfig {
            command: self.command,
            family: self.family,
            dimension: self.dimension,
            point: self.point.clone(),
            velocity: self.velocity.clone(),
            from: self.from.clone(),
            to: self.to.clone(),
            points: self.points.clone(),
            weights: self.weights.clone(),
            time: self.time,
            samples: self.samples,
            tol: self.tol,
            max_iterations: self.max_iterations,
            range: self.range,
            res: self.res,
            scale: self.scale,
            z: self.z,
            x0: self.x0,
            xdot0: self.xdot0,
            centers: self.centers.clone(),
            radii: self.radii.clone(),
            seed: self.seed,
            output: self.output.clone(),
            format: self.format,
        }
    }

    /// The config file (if any) with the flags laid over it.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        Ok(base.overlaid_with(self.flags()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_parsing() {
        assert_eq!("1e-3:1e3".parse::<Span>().unwrap(), Span { lo: 1e-3, hi: 1e3 });
        assert!("1e-3".parse::<Span>().is_err());
        assert!("a:1".parse::<Span>().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_json(r#"{"family": "rational", "res": 10, "range": [0.1, 2]}"#).unwrap();
        let cli = Cli::try_parse_from(["fisher-dirichlet", "curvature-grid", "--res", "20"]).unwrap();
        let merged = file.overlaid_with(cli.flags());
        assert_eq!(merged.res, Some(20));
        assert_eq!(merged.family, Some(FamilyName::Rational));
        assert_eq!(merged.range, Some(Span { lo: 0.1, hi: 2.0 }));
        assert_eq!(merged.command, Some(Command::CurvatureGrid));
    }

    #[test]
    fn point_lists() {
        let cli = Cli::try_parse_from([
            "x",
            "mean",
            "--points",
            "2,5;2,2",
            "--points",
            "5,1",
            "--velocity",
            "-1,0.5",
        ])
        .unwrap();
        assert_eq!(
            cli.points.unwrap(),
            vec![vec![2.0, 5.0], vec![2.0, 2.0], vec![5.0, 1.0]]
        );
        assert_eq!(cli.velocity.unwrap(), vec![-1.0, 0.5]);
    }
}
