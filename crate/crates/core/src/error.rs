use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid qubit count {0}: need K >= 1 and a 2^K dimensional Hamiltonian")]
    InvalidQubitCount(usize),

    #[error(
        "degenerate spectrum: levels {lower} and {upper} differ by {gap:.3e} <= tol {tol:.3e}"
    )]
    DegenerateSpectrum {
        lower: usize,
        upper: usize,
        gap: f64,
        tol: f64,
    },

    #[error("field strength must be positive, got {0}")]
    NonPositiveField(f64),

    #[error("inverse temperature must be positive and finite, got {0}")]
    NonPositiveBeta(f64),

    #[error("zero eigenvalue of the rate matrix has multiplicity {multiplicity}; stationary state is not unique")]
    ErgodicityViolation { multiplicity: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("ensemble has no members")]
    EmptyEnsemble,

    #[error("Liouvillian has no real nonzero eigenvalue; dissipation time undefined")]
    NoDissipativeEigenvalue,

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
