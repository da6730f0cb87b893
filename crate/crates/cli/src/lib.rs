//! Scenario runner, verification driver and plotting for the `heisenlab`
//! binary.
//!
//! Exit status: 0 success, 1 a check or expectation failed, 2 usage,
//! configuration or I/O error.

pub mod plot;
pub mod run;
pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use heisenlab::verify::{run_all, VerificationReport, VerifyConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("invalid value for `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Lab(#[from] heisenlab::Error),

    #[error("missing data channel `{0}`")]
    MissingChannel(String),

    #[error("plot failed: {0}")]
    Plot(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub const EXIT_CHECK_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn load_verify_config(path: Option<&Path>) -> Result<VerifyConfig, CliError> {
    let cfg = match path {
        Some(p) => parse_json(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?,
        None => VerifyConfig::default(),
    };
    Ok(cfg)
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOverrides {
    pub basis_levels: Option<usize>,
    pub interior_fraction: Option<f64>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
}

impl VerifyOverrides {
    pub fn apply(&self, cfg: &mut VerifyConfig) {
        if let Some(n) = self.basis_levels {
            cfg.levels_1d = n;
            cfg.levels_2d = n;
        }
        if let Some(f) = self.interior_fraction {
            cfg.interior_fraction = f;
        }
        if self.tolerance.is_some() {
            cfg.tolerance = self.tolerance;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

pub const VERIFY_REPORT: &str = "verify_report.json";

/// Runs the suite and writes `verify_report.json` into `out_dir`.
pub fn run_verify(cfg: &VerifyConfig, out_dir: &Path) -> Result<(VerificationReport, PathBuf), CliError> {
    let report = run_all(cfg)?;
    ensure_dir(out_dir)?;
    let path = out_dir.join(VERIFY_REPORT);
    let mut json = report.to_json();
    json.push('\n');
    write_atomic(&path, json.as_bytes())?;
    Ok((report, path))
}
