use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the emulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("qubit index {index} out of range for a register of {qubits} qubits")]
    QubitIndex { index: usize, qubits: usize },

    #[error("control qubit {0} overlaps the target Pauli string")]
    ControlOverlap(usize),

    #[error("unsupported Pauli string shape: {0}")]
    UnsupportedString(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("missing contribution: {0}")]
    MissingContribution(String),

    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("empty fit band")]
    EmptyFitBand,

    #[error("method requires U = 0, got U = {0}")]
    Interacting(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
