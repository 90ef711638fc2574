//! Experiment configuration: TOML file, command-line flags and defaults.
//!
//! Precedence is flag > file > `QCORR_OUT_DIR` (output directory only) >
//! built-in default.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_POINTS: usize = 360;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_OUT_DIR: &str = "results";
pub const OUT_DIR_ENV: &str = "QCORR_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Mzi,
    DelayedChoice,
    Measure,
    Rto,
    Scan,
    Bell,
    Table1,
    Sample,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Mzi,
        Experiment::DelayedChoice,
        Experiment::Measure,
        Experiment::Rto,
        Experiment::Scan,
        Experiment::Bell,
        Experiment::Table1,
        Experiment::Sample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Mzi => "mzi",
            Experiment::DelayedChoice => "delayed-choice",
            Experiment::Measure => "measure",
            Experiment::Rto => "rto",
            Experiment::Scan => "scan",
            Experiment::Bell => "bell",
            Experiment::Table1 => "table1",
            Experiment::Sample => "sample",
        }
    }

    pub fn uses_grid(self) -> bool {
        matches!(self, Experiment::Mzi | Experiment::Scan | Experiment::Bell)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format {other:?} (expected csv, json or svg)")),
        }
    }
}

/// Inclusive linear grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            start: 0.0,
            stop: TAU,
            points: DEFAULT_POINTS,
        }
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.start],
            n => {
                let step = (self.stop - self.start) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            self.stop
                        } else {
                            self.start + step * i as f64
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Parses a real number, also accepting multiples of pi such as `pi`,
/// `2pi`, `0.5pi` and `pi/4`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let pi = std::f64::consts::PI;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("invalid number {s:?}"));
    if let Some((head, tail)) = t.split_once("pi") {
        let factor = match head.trim() {
            "" => 1.0,
            "-" => -1.0,
            h => parse(h.trim_end_matches('*'))?,
        };
        let divisor = match tail.trim() {
            "" => 1.0,
            d => parse(d.strip_prefix('/').ok_or_else(|| format!("invalid angle {s:?}"))?)?,
        };
        return Ok(factor * pi / divisor);
    }
    parse(t)
}

impl FromStr for Grid {
    type Err = String;

    /// `START:STOP:POINTS`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, points] = parts.as_slice() else {
            return Err(format!("grid {s:?} is not START:STOP:POINTS"));
        };
        let points: i64 = points
            .trim()
            .parse()
            .map_err(|_| format!("grid points {points:?} is not an integer"))?;
        Ok(Grid {
            start: parse_angle(start)?,
            stop: parse_angle(stop)?,
            // negative counts are reported by validation
            points: points.max(0) as usize,
        })
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error(
        "unknown experiment {0:?} (expected one of mzi, delayed-choice, measure, rto, scan, bell, table1, sample)"
    )]
    UnknownExperiment(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
}

/// Command-line interface.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "qcorr",
    version,
    about = "Run interference and correlation experiments",
    allow_negative_numbers = true
)]
pub struct CliArgs {
    /// Experiment to run; may also be given as `experiment` in the config file.
    pub experiment: Option<String>,

    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Phase at A (or phi1 of the interferometer), radians.
    #[arg(long, value_name = "RAD", value_parser = parse_angle)]
    pub phase_a: Option<f64>,

    /// Phase at B (or phi2 of the interferometer), radians.
    #[arg(long, value_name = "RAD", value_parser = parse_angle)]
    pub phase_b: Option<f64>,

    /// Scan grid over the phase difference, START:STOP:POINTS.
    #[arg(long, value_name = "START:STOP:POINTS")]
    pub grid: Option<Grid>,

    /// Monte Carlo trials.
    #[arg(long, value_name = "N")]
    pub trials: Option<i64>,

    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Output directory [default: $QCORR_OUT_DIR or ./results].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Comma-separated output formats.
    #[arg(long, value_name = "csv,json,svg", value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    Text(String),
    Table { start: f64, stop: f64, points: i64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AngleSpec {
    Number(f64),
    Integer(i64),
    Text(String),
}

/// Keys accepted in a config file; each has a matching flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    experiment: Option<String>,
    phase_a: Option<AngleSpec>,
    phase_b: Option<AngleSpec>,
    grid: Option<GridSpec>,
    trials: Option<i64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub phase_a: f64,
    pub phase_b: f64,
    pub grid: Grid,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub formats: BTreeSet<Format>,
}

impl ExperimentConfig {
    /// Defaults for `experiment`, writing to `output_dir`.
    pub fn new(experiment: Experiment, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment,
            phase_a: 0.0,
            phase_b: 0.0,
            grid: Grid::default(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            output_dir: output_dir.into(),
            formats: BTreeSet::from([Format::Csv]),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn angle(spec: AngleSpec, key: &str) -> Result<f64, ConfigError> {
    match spec {
        AngleSpec::Number(x) => Ok(x),
        AngleSpec::Integer(i) => Ok(i as f64),
        AngleSpec::Text(s) => parse_angle(&s).map_err(|message| ConfigError::Parse {
            context: format!("config key `{key}`"),
            message,
        }),
    }
}

fn parse_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_file_text(&text, &path.display().to_string())
}

fn parse_file_text(text: &str, origin: &str) -> Result<FileConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let context = match e.span() {
            Some(span) => {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                format!("{origin}:{line}")
            }
            None => origin.to_string(),
        };
        ConfigError::Parse {
            context,
            message: e.message().to_string(),
        }
    })
}

/// Reads `--config` (if any) and merges it with the flags.
pub fn parse_config(args: &CliArgs) -> Result<ExperimentConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => parse_file(path)?,
        None => FileConfig::default(),
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    resolve(args, file, env_out)
}

/// Same as [`parse_config`] with the file given as text.
pub fn parse_config_str(
    args: &CliArgs,
    toml_text: &str,
    env_out: Option<PathBuf>,
) -> Result<ExperimentConfig, ConfigError> {
    resolve(args, parse_file_text(toml_text, "<config>")?, env_out)
}

fn resolve(args: &CliArgs, file: FileConfig, env_out: Option<PathBuf>) -> Result<ExperimentConfig, ConfigError> {
    let name = args
        .experiment
        .clone()
        .or(file.experiment)
        .ok_or_else(|| ConfigError::Parse {
            context: "arguments".into(),
            message: "no experiment given".into(),
        })?;
    let experiment: Experiment = name.parse()?;

    let phase_a = match (args.phase_a, file.phase_a) {
        (Some(x), _) => x,
        (None, Some(s)) => angle(s, "phase_a")?,
        (None, None) => 0.0,
    };
    let phase_b = match (args.phase_b, file.phase_b) {
        (Some(x), _) => x,
        (None, Some(s)) => angle(s, "phase_b")?,
        (None, None) => 0.0,
    };

    let mut grid_points_raw: Option<i64> = None;
    let grid = match (args.grid, file.grid) {
        (Some(g), _) => g,
        (None, Some(GridSpec::Text(s))) => s.parse().map_err(|message| ConfigError::Parse {
            context: "config key `grid`".into(),
            message,
        })?,
        (None, Some(GridSpec::Table { start, stop, points })) => {
            grid_points_raw = Some(points);
            Grid {
                start,
                stop,
                points: points.max(0) as usize,
            }
        }
        (None, None) => Grid::default(),
    };

    let trials = args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS as i64);
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let output_dir = args
        .out
        .clone()
        .or(file.out)
        .or(env_out)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let formats: BTreeSet<Format> = match (&args.format, file.format) {
        (Some(f), _) => f.iter().copied().collect(),
        (None, Some(list)) => list
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_, _>>()
            .map_err(|message| ConfigError::Parse {
                context: "config key `format`".into(),
                message,
            })?,
        (None, None) => BTreeSet::from([Format::Csv]),
    };

    let mut violations = Vec::new();
    if grid.points < 2 || grid_points_raw.is_some_and(|p| p < 2) {
        violations.push(format!(
            "points ≥ 2 (got {})",
            grid_points_raw.unwrap_or(grid.points as i64)
        ));
    }
    if !grid.start.is_finite() || !grid.stop.is_finite() {
        violations.push("grid bounds must be finite".to_string());
    }
    if trials < 0 {
        violations.push(format!("trials ≥ 0 (got {trials})"));
    }
    for (key, v) in [("phase_a", phase_a), ("phase_b", phase_b)] {
        if !v.is_finite() {
            violations.push(format!("{key} must be finite"));
        }
    }
    if formats.is_empty() {
        violations.push("at least one output format".to_string());
    }
    if !violations.is_empty() {
        return Err(ConfigError::Validation(violations));
    }

    Ok(ExperimentConfig {
        experiment,
        phase_a,
        phase_b,
        grid,
        trials: trials as u64,
        seed,
        output_dir,
        formats,
    })
}
