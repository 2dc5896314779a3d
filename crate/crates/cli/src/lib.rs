//! Batch experiment runner: resolves a configuration, runs one experiment
//! kind and writes CSV/JSON artifacts plus a `summary.json` manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;

use std::fmt;

pub use config::{parse_config, ConfigSources, ExperimentConfig, Kind, Params};
pub use experiments::run_experiment;
pub use output::{OutputFile, RunSummary};

#[derive(Debug)]
pub enum RunError {
    /// Invalid or unknown configuration.
    Config(String),
    /// A numerical failure inside the library.
    Numeric(ergostab_core::Error),
    /// The run was dominated by diverged orbits.
    Divergence(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Numeric(_) | RunError::Io(_) => 2,
            RunError::Divergence(_) => 3,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Numeric(_) => "numeric",
            RunError::Divergence(_) => "divergence",
            RunError::Io(_) => "io",
        }
    }

    /// One-line JSON error report.
    pub fn report(&self) -> String {
        serde_json::json!({
            "error": self.category(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Numeric(e) => write!(f, "{e}"),
            RunError::Divergence(m) => write!(f, "divergence: {m}"),
            RunError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ergostab_core::Error> for RunError {
    fn from(e: ergostab_core::Error) -> Self {
        use ergostab_core::Error as E;
        match e {
            E::Divergence { .. } | E::NotErgodic(_) => RunError::Divergence(e.to_string()),
            E::Parameter(m) => RunError::Config(m),
            E::Io(e) => RunError::Io(e.to_string()),
            other => RunError::Numeric(other),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}
