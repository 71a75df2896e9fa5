use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("CFL violation: dt = {dt} exceeds the advective limit {limit} (dx = {dx}, max|b| = {max_speed})")]
    CflViolation { dt: f64, limit: f64, dx: f64, max_speed: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("domain too small: boundary density {density:e} exceeds tolerance {tolerance:e} at t = {t}")]
    DomainTooSmall { density: f64, tolerance: f64, t: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("position {position} lies outside the domain [{x_min}, {x_max}]")]
    OutOfDomain { position: f64, x_min: f64, x_max: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("refusing to overwrite existing output in {}; pass --force", .0.display())]
    RefusesOverwrite(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Io { .. } | Error::RefusesOverwrite(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
