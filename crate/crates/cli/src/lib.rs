//! Configuration-driven experiment runner.
//!
//! A run reads one TOML file, checks the preconditions of the selected
//! experiment, evaluates it and writes plot-ready CSV tables, a pass/fail
//! summary and a manifest that can be fed back in to reproduce the run.

pub mod config;
pub mod experiments;
pub mod report;
pub mod validate;

use thiserror::Error;

pub use config::{ExperimentConfig, Kind};
pub use experiments::{run_experiment, Check, Outcome};
pub use report::{write_outputs, Manifest};
pub use validate::{validate, Diagnostic, Severity};

/// Failure of a run, carrying its process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or inconsistent configuration, or unwritable output.
    #[error("configuration: {0}")]
    Config(String),
    /// A precondition of the experiment does not hold.
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<varifold_core::Error> for CliError {
    fn from(e: varifold_core::Error) -> Self {
        use varifold_core::Error as E;
        match e {
            E::HypothesisViolated { .. }
            | E::GammaInfeasible { .. }
            | E::OutsideMesh { .. }
            | E::InvalidArgument(_)
            | E::DimensionMismatch { .. } => CliError::Precondition(e.to_string()),
            E::Io(_) | E::Parse(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
