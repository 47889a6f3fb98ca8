use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for {qubits} qubits")]
    BadIndex { index: usize, qubits: usize },

    #[error("post-selection branch has zero probability (norm {norm:.3e})")]
    ZeroProbability { norm: f64 },

    #[error("matrix is singular (smallest |eigenvalue| or pivot {magnitude:.3e})")]
    Singular { magnitude: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("rotation constant C={c} gives amplitude {amplitude} > 1 on register value {k}")]
    InvalidC { c: f64, k: usize, amplitude: f64 },

    #[error("unphysical Pauli expectations (Bloch radius {radius})")]
    UnphysicalExpectations { radius: f64 },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid argument: {0}")]
    BadFlag(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
