//! Command-line front end: argument parsing, config loading and the
//! commands behind the `edge-surgery` binary.
//!
//! Exit codes: 0 for success, 1 for an invalid configuration or a failed
//! computation, 2 for I/O, format and argument errors.

// Errors carry the offending angles, which are big rationals; they are
// built only on failure paths.
#![allow(clippy::result_large_err)]

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use edge_surgery::plane::{PlaneError, SolverSettings};
use edge_surgery::surgery::{ConfigFile, ConfigFileError, TuningError};
use edge_surgery::{Angle, SurgeryError};
use num_complex::Complex64;
use thiserror::Error;

mod commands;
pub mod report;

#[derive(Debug, Parser)]
#[command(
    name = "edge-surgery",
    version,
    about = "Surgery on Mandelbrot set edges"
)]
pub struct Cli {
    /// Edge configuration (JSON with eight "p/q" angles).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for reports and generated files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Add numeric verification (rays and Newton solvers).
    #[arg(long, global = true)]
    pub numeric: bool,
    /// Solver setting override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the edge conditions and report first-return data.
    Validate,
    /// Apply h^n to an angle.
    MapAngle {
        #[arg(value_parser = parse_angle)]
        theta: Angle,
        #[arg(short, long, default_value_t = 1, allow_negative_numbers = true)]
        n: i64,
    },
    /// Apply h^n to a Misiurewicz point or a center.
    MapParam(MapParamArgs),
    /// Fundamental domain endpoints for -n_max..=n_max.
    Domains {
        #[arg(default_value_t = 3)]
        n_max: u32,
    },
    /// Tune the configuration by digit substitution.
    Tune { word0: String, word1: String },
    /// Escape-time image with an SVG overlay of the eight rays.
    Render(RenderArgs),
    /// Print a ray as "re im potential" lines.
    TraceRay {
        #[arg(value_parser = parse_angle)]
        theta: Angle,
        /// Trace the dynamic ray of this parameter instead of the parameter ray.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c: Option<Complex64>,
    },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["misiurewicz", "center"])))]
pub struct MapParamArgs {
    /// Misiurewicz point with this external angle.
    #[arg(long, value_parser = parse_angle, value_name = "THETA")]
    pub misiurewicz: Option<Angle>,
    /// Center of the component of this period whose root has this angle.
    #[arg(long, num_args = 2, value_names = ["PERIOD", "THETA"])]
    pub center: Option<Vec<String>>,
    #[arg(short, long, default_value_t = 1, allow_negative_numbers = true)]
    pub n: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneKind {
    Parameter,
    Dynamic,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, value_enum, default_value_t = PlaneKind::Parameter)]
    pub plane: PlaneKind,
    /// Parameter of the dynamic plane; defaults to the lowest-period
    /// center inside the edge.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub c: Option<Complex64>,
    /// Viewport center as "re,im"; defaults frame the edge or the Julia set.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub center: Option<Complex64>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: u32,
}

pub fn parse_angle(s: &str) -> Result<Angle, String> {
    s.parse::<Angle>().map_err(|e| e.to_string())
}

/// `"re,im"`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"re,im\", got {s:?}"))?;
    let part = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| format!("{x:?}: {e}"))
            .and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format!("{x:?} is not finite"))
                }
            })
    };
    Ok(Complex64::new(part(re)?, part(im)?))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Config {
        path: PathBuf,
        source: ConfigFileError,
    },
    #[error("this command needs --config PATH")]
    MissingConfig,
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Tuning(#[from] TuningError),
    #[error(transparent)]
    Parameters(PlaneError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
    #[error(transparent)]
    Numeric(PlaneError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Surgery(_) | CliError::Numeric(_) => 1,
            _ => 2,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<PlaneError> for CliError {
    fn from(e: PlaneError) -> Self {
        match e {
            PlaneError::UnknownSetting(_)
            | PlaneError::InvalidSetting { .. }
            | PlaneError::InvalidViewport(_) => CliError::Parameters(e),
            other => CliError::Numeric(other),
        }
    }
}

/// What a successful run prints. `code` is 1 when the run completed but
/// found the configuration invalid or a check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub diagnostics: Vec<String>,
    pub code: u8,
}

/// Inputs resolved before any command runs.
pub(crate) struct Context {
    pub config: Option<LoadedConfig>,
    pub out: Option<PathBuf>,
    pub numeric: bool,
    pub settings: SolverSettings,
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: String,
    pub file: ConfigFile,
    pub angles: [Angle; 8],
}

impl Context {
    pub fn config(&self) -> Result<&LoadedConfig, CliError> {
        self.config.as_ref().ok_or(CliError::MissingConfig)
    }

    /// Output directory, created on demand; the working directory when
    /// `--out` is absent.
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.out_dir().join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Reads and parses a config file; the angles are tuned if the file
/// carries a tuning word.
pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let wrap = |source| CliError::Config {
        path: path.to_path_buf(),
        source,
    };
    let file = ConfigFile::from_json(&text).map_err(wrap)?;
    let angles = file.angles().map_err(wrap)?;
    Ok(LoadedConfig {
        path: path.display().to_string(),
        file,
        angles,
    })
}

fn resolve(cli: &Cli) -> Result<Context, CliError> {
    let settings = SolverSettings::default().with_overrides(cli.set.iter().map(String::as_str))?;
    let config = cli.config.as_deref().map(load_config).transpose()?;
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(Context {
        config,
        out: cli.out.clone(),
        numeric: cli.numeric,
        settings,
    })
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let ctx = resolve(cli)?;
    match &cli.command {
        Command::Validate => commands::validate(&ctx),
        Command::MapAngle { theta, n } => commands::map_angle(&ctx, theta, *n),
        Command::MapParam(args) => commands::map_param(&ctx, args),
        Command::Domains { n_max } => commands::domains(&ctx, *n_max),
        Command::Tune { word0, word1 } => commands::tune(&ctx, word0, word1),
        Command::Render(args) => commands::render(&ctx, args),
        Command::TraceRay { theta, c } => commands::trace_ray(&ctx, theta, *c),
    }
}
