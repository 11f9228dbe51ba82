use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the solver, simulation and image pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    /// A fractional power of a negative base was requested.
    #[error("domain error at r = {r}: {what}")]
    Domain { r: f64, what: String },

    #[error("radial solver diverged at r = {r}: {reason}")]
    SolverDiverged { r: f64, reason: String },

    #[error("simulation diverged at step {step}: non-finite state")]
    SimulationDiverged { step: usize },

    #[error("no path exited the domain before the time cap ({n_paths} simulated)")]
    EstimateUnavailable { n_paths: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("tuning config (sigma={sigma}, T={t_total}, dt={dt}) failed: {source}")]
    Tuning {
        sigma: f64,
        t_total: f64,
        dt: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Config(_) => 2,
            Error::Domain { .. }
            | Error::SolverDiverged { .. }
            | Error::EstimateUnavailable { .. } => 3,
            Error::Io { .. } | Error::Image { .. } => 4,
            Error::SimulationDiverged { .. } => 5,
            Error::Tuning { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
