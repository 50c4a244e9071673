use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum NtnError {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates an invariant.
    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    /// The configuration file could not be parsed.
    #[error("parse error in {path}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    /// Callers passed arguments that do not fit together (dimensions, kinds, empty inputs).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A linear system could not be solved.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A UE cannot deliver its payload within the frame at maximum power.
    #[error("infeasible payload: UE {ue} needs {required_bps:.3e} bit/s but can reach at most {max_rate_bps:.3e} bit/s")]
    Infeasible {
        ue: usize,
        required_bps: f64,
        max_rate_bps: f64,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl NtnError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        NtnError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, NtnError>;
