use thiserror::Error;

/// Errors produced by the simulator and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |h - h^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U U^dagger - I| = {0:e})")]
    NotUnitary(f64),

    #[error("channel weights do not form a probability distribution (sum = {0})")]
    InvalidWeights(f64),

    #[error("pauli length mismatch: {0} vs {1} qubits")]
    LengthMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("too few points above floor {floor:e}: {found} (need at least {needed})")]
    TooFewPoints {
        floor: f64,
        found: usize,
        needed: usize,
    },

    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for violations of a numerical contract (Hermiticity, unitarity,
    /// channel normalization), as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian(_) | Error::NotUnitary(_) | Error::InvalidWeights(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
