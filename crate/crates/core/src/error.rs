//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric: |A[{row},{col}] - A[{col},{row}]| = {deviation:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("symmetric eigensolver did not converge within {max_iterations} iterations")]
    NoConvergence { max_iterations: usize },

    #[error("linear system is singular")]
    Singular,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("qubit index {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("{num_qubits} qubits exceeds the simulator capacity of {max} qubits")]
    Capacity { num_qubits: usize, max: usize },

    #[error("cannot keep {keep} of {num_qubits} qubits (need 1 <= keep < num_qubits)")]
    SubsystemOutOfRange { keep: usize, num_qubits: usize },

    #[error("operator is not Hermitian: imaginary residue {residue:e}")]
    NonHermitian { residue: f64 },

    #[error("state is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
