use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use symrestore::restore::Method;
use symrestore::{HalfInt, SymmetryKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Probability,
    Amplitude,
}

/// Everything an experiment reads. Loaded from `--config`, then overridden
/// field by field by whatever flags were given.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub n_qubits: Option<usize>,
    pub kind: Option<SymmetryKind>,
    pub target: Option<HalfInt>,
    pub method: Option<Method>,
    /// Grover schedule: `auto` or `fixed:<steps>`.
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub trials: Option<usize>,
    pub steps: Option<usize>,
    pub quantity: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file with experiment settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub qubits: Option<usize>,
    /// Symmetry to restore: number, sz, parity.
    #[arg(long, global = true)]
    pub kind: Option<SymmetryKind>,
    /// Target eigenvalue, e.g. `4`, `-1/2`, `1.5`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub target: Option<HalfInt>,
    #[arg(long, global = true)]
    pub method: Option<Method>,
    /// Grover schedule: `auto` or `fixed:<steps>`.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub quantity: Option<Quantity>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn resolve(experiment: &str, args: &CommonArgs) -> Result<Self, ConfigError> {
        let mut cfg = match &args.config {
            Some(path) => load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &cfg.experiment {
            if name != experiment {
                return Err(ConfigError(format!("config is for experiment '{name}', not '{experiment}'")));
            }
        }
        cfg.experiment = Some(experiment.to_string());
        macro_rules! over {
            ($($field:ident <- $flag:ident),*) => {
                $(if args.$flag.is_some() { cfg.$field = args.$flag.clone(); })*
            };
        }
        over!(n_qubits <- qubits, kind <- kind, target <- target, method <- method, mode <- mode,
              seed <- seed, out <- out, format <- format, trials <- trials, steps <- steps, quantity <- quantity);
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroverSchedule {
    Auto,
    Fixed(usize),
}

pub fn parse_mode(mode: Option<&str>) -> Result<GroverSchedule, ConfigError> {
    match mode.map(str::trim) {
        None | Some("auto") => Ok(GroverSchedule::Auto),
        Some(m) => m
            .strip_prefix("fixed:")
            .and_then(|n| n.parse().ok())
            .map(GroverSchedule::Fixed)
            .ok_or_else(|| ConfigError(format!("mode must be 'auto' or 'fixed:<steps>', got '{m}'"))),
    }
}
