//! Command-line driver for the `spo_core` simulator.
//!
//! Each subcommand resolves its flags into an [`ExperimentConfig`], runs the
//! matching simulation and writes CSV/JSON files whose `#` header (or `config`
//! key) records the tool version and the resolved configuration.

pub mod config;
pub mod exec;

pub use config::{parse_k_expression, parse_size, Cli, ExperimentConfig};
pub use exec::{execute, Outcome};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {flag}: {message}")]
    Config { flag: String, message: String },
    #[error(transparent)]
    Core(#[from] spo_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration errors, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } => 2,
            _ => 1,
        }
    }
}
