use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the laboratory.
///
/// The variants map onto the CLI exit codes: `Certification` is 1,
/// `Config`/`Validation`/`Domain`/`Cfl` are 2, numerical failures are 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("CFL condition violated: dt = {dt:e} exceeds the limit {limit:e}; try dt <= {suggested:e}")]
    Cfl { dt: f64, limit: f64, suggested: f64 },

    #[error("numerical instability at step {step} (t = {t:e})")]
    Instability { step: usize, t: f64 },

    #[error("stiffness: step rejected after {halvings} halvings at t = {t:e}")]
    Stiffness { halvings: u32, t: f64 },

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: line {line}: {msg}")]
    Csv { path: PathBuf, line: usize, msg: String },
}

impl Error {
    /// Exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Certification(_) => 1,
            Error::Instability { .. } | Error::Stiffness { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
