use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes at q = {at}")]
    Pole { at: String },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("invalid field specification: {0}")]
    InvalidSpec(String),
    #[error("cannot specialize: {0}")]
    Specialization(#[from] ScalarError),
    #[error("{0} is not invertible in {1}")]
    NotInvertible(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("slot out of range: {0}")]
    BadSlot(String),
    #[error("operator is not invertible")]
    NotInvertible,
    #[error("operator is not idempotent")]
    NotIdempotent,
    #[error("trace {0} is not a nonnegative integer")]
    NotAnInteger(String),
    #[error("expected an idempotent of rank 1, found rank {0}")]
    RankNotOne(i64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeckeError {
    #[error("Yang-Baxter equation fails at row {row:?}, column {col:?}: residual {residual}")]
    YbeViolation { row: Vec<usize>, col: Vec<usize>, residual: String },
    #[error("Hecke condition fails at row {row:?}, column {col:?}: residual {residual}")]
    HeckeViolation { row: Vec<usize>, col: Vec<usize>, residual: String },
    #[error("symmetry is not closed: the partial transpose of P*R is singular")]
    NotClosed,
    #[error("no vanishing antisymmetrizer up to k = {bound}")]
    NotEven { bound: usize },
    #[error("antisymmetrizer P^{rank} has rank {found}, expected a one-dimensional image")]
    RankImageNotOneDimensional { rank: usize, found: i64 },
    #[error("rank has not been detected")]
    RankUnknown,
    #[error("identity check failed: {0}")]
    Postcondition(String),
    #[error("unsupported builtin: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("degree mismatch: polynomial has degree {found}, basis has degree {expected}")]
    DegreeMismatch { expected: usize, found: String },
    #[error("resource guard: degree {degree} component needs {columns} columns (cap {cap})")]
    Resource { degree: usize, columns: u128, cap: usize },
    #[error("generator dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl From<TensorError> for AlgebraError {
    fn from(e: TensorError) -> Self {
        AlgebraError::Hecke(HeckeError::Tensor(e))
    }
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read R-matrix file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed R-matrix JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid R-matrix data: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}
