use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the requested formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The phase-matching system has no real solution.
    #[error("no phase-matching solution: {0}")]
    NoSolution(String),

    /// A text document (parameter file or timeline) failed to parse.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Structurally valid input that is inconsistent or incomplete.
    #[error("configuration error: {0}")]
    Config(String),

    /// The integrator produced a non-finite value or lost the excitation balance.
    #[error("numerical blow-up in `{array}` at t = {t:.6e} s")]
    NumericalBlowUp { array: &'static str, t: f64 },

    /// A derived measurement could not be made on the supplied data.
    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Config(_) | Error::Domain(_) | Error::NoSolution(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
