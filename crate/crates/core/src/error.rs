use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped by how a caller is expected to react: precondition
/// failures (the input is valid but the requested object does not exist),
/// malformed input, and numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix data has {found} entries, expected {expected}")]
    BadShape { expected: usize, found: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("empty input")]
    Empty,

    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("diagonal entry {index} has imaginary part {imag:e}")]
    ComplexDiagonal { index: usize, imag: f64 },

    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),

    #[error("vector is not majorised by the target (worst slack {slack:e})")]
    NotMajorized { slack: f64 },

    #[error("entry {index} = {value} lies outside [0, 1]")]
    OutsideUnitInterval { index: usize, value: f64 },

    #[error("sum is not an integer (defect {defect})")]
    NonIntegerSum { defect: f64 },

    #[error("block {block} has non-integer sum (defect {defect})")]
    NonIntegerBlock { block: usize, defect: f64 },

    #[error("sequence is not the diagonal of a projection (defect {defect})")]
    Infeasible { defect: f64 },

    #[error("construction requires {expected}, sequence is {found}")]
    WrongCase { expected: &'static str, found: &'static str },

    #[error("invalid sequence specification: {0}")]
    InvalidSpec(String),

    #[error("uncertified tail: {0}")]
    Uncertified(String),

    #[error("budget of {budget} exhausted: {what}")]
    BudgetExhausted { budget: usize, what: String },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("malformed file: {0}")]
    Format(String),
}

impl Error {
    /// True for errors that mean the requested object does not exist for a
    /// well-formed input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotMajorized { .. }
                | Error::NonIntegerSum { .. }
                | Error::NonIntegerBlock { .. }
                | Error::Infeasible { .. }
                | Error::WrongCase { .. }
                | Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::NotDoublyStochastic(_)
                | Error::OutsideUnitInterval { .. }
        )
    }

    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
