//! Batch front-end: reads a run configuration, executes one mode and writes
//! CSV artifacts with a self-describing header.
//!
//! Exit codes: 0 success, 2 invalid configuration or input file,
//! 3 numerical failure (including failed validation checks), 4 I/O failure.

pub mod config;
pub mod run;
pub mod validate;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{parse_config, ConfigError, RunConfig, RunMode};
pub use run::{run, Artifact, RunOutput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: ionbell_core::Error },

    #[error(transparent)]
    Numerical(#[from] ionbell_core::Error),

    #[error("{failed} validation check(s) failed")]
    Validation { failed: usize, output: Box<RunOutput> },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Numerical(_) | CliError::Validation { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}

/// Reads and validates a configuration file; relative paths inside it are
/// taken relative to the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(parse_config(&text, path.parent())?)
}

/// Writes every artifact into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}
