use serde::Deserialize;
use std::path::{Path, PathBuf};

use reeb_core::{HamiltonianModel, ModelDefinition};

use crate::CliError;

/// Settings read from `--config`. Every field may also be given as a flag of
/// the same name (dashes for underscores); flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    pub energy: Option<f64>,
    pub tol: Option<f64>,
    pub depth: Option<u32>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub resolution: Option<usize>,
    pub certify: Option<bool>,
    pub grid: Option<usize>,
    pub spot_check: Option<usize>,
    pub symmetry: Option<String>,
    pub seed_point: Option<[f64; 4]>,
    pub period_guess: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub orbit_samples: Option<usize>,
    pub path_samples: Option<usize>,
    pub orbit_file: Option<PathBuf>,
    pub frame: Option<String>,
    pub iterate: Option<usize>,
    pub engine: Option<String>,
    pub eps: Option<f64>,
    pub radial: Option<usize>,
    pub angular: Option<usize>,
    pub disk: Option<String>,
    pub curve: Option<PathBuf>,
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub p: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// `Some(flag)` beats the config value, which beats `default`.
pub fn pick<T: Clone>(flag: Option<T>, config: &Option<T>, default: T) -> T {
    flag.or_else(|| config.clone()).unwrap_or(default)
}

pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-4);

pub fn check_tol(tol: f64) -> Result<f64, CliError> {
    if (TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!("--tol {tol:e} outside [{:e}, {:e}]", TOL_RANGE.0, TOL_RANGE.1)))
    }
}

/// A built-in model name or the path of a JSON model definition.
pub fn load_model(reference: &str) -> Result<HamiltonianModel, CliError> {
    let path = Path::new(reference);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{reference}: {e}")))?;
        let def: ModelDefinition =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{reference}: {e}")))?;
        return Ok(HamiltonianModel::from_definition(&def)?);
    }
    Ok(HamiltonianModel::builtin(reference)?)
}
