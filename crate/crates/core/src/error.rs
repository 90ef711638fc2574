use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("vector norm is zero")]
    ZeroVector,

    #[error("basis must contain at least one label")]
    EmptyBasis,

    #[error("duplicate basis label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown basis label {0:?}")]
    UnknownLabel(String),

    #[error("unknown optical mode {0:?}")]
    UnknownMode(String),

    #[error("expected {expected} amplitudes, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch { expected: String, found: String },

    #[error("basis {0} carries no product structure")]
    NotProductBasis(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionError { expected: usize, found: usize },

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("expectation value has imaginary part {0:e}")]
    ComplexExpectation(f64),

    #[error("{name} = {value} is outside {range}")]
    DomainError {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("grid is empty")]
    EmptyGrid,

    #[error("tally is empty")]
    EmptyTally,
}

pub type Result<T> = std::result::Result<T, QError>;
