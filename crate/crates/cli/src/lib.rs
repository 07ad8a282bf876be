//! Command-line driver: configuration, experiment runs, CSV/JSON artifacts
//! and gnuplot scripts.

pub mod config;
pub mod experiment;
pub mod output;
pub mod plot;

use std::fmt;
use std::path::{Path, PathBuf};

pub use config::{parse_config, parse_config_with, Command, ConfigError, ExperimentConfig};
pub use experiment::{run_experiment, RunOutput};
pub use plot::{PlotError, PlotKind};

/// Failure of a CLI invocation, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Runtime(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

/// Read a config file (if any), apply overrides and validate.
pub fn load_config(
    command: Command,
    file: Option<&Path>,
    overrides: &[String],
    output: Option<PathBuf>,
) -> Result<ExperimentConfig, CliError> {
    let text = match file {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut overrides = overrides.to_vec();
    if let Some(o) = output {
        // routed through the override path so it lands in the resolved header
        overrides.push(format!("output={}", toml::Value::String(o.display().to_string())));
    }
    Ok(parse_config_with(&text, Some(command), &overrides)?)
}

/// Write a gnuplot script next to `csv_path` and return its path.
pub fn emit_plot_script(csv_path: &Path, kind: Option<PlotKind>) -> Result<PathBuf, CliError> {
    let csv = std::fs::read_to_string(csv_path).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    let (_, script) = plot::plot_script(&csv, csv_path, kind).map_err(|e| CliError::Runtime(e.to_string()))?;
    let out = plot::script_path(csv_path);
    output::write_atomic(&out, &script).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok(out)
}
