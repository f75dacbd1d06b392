use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("eigenvalue {0:e} is below the clamp threshold")]
    NegativeEigenvalue(f64),
    #[error("singular matrix")]
    Singular,
    #[error("singular constant term (condition estimate {0:e})")]
    SingularConstantTerm(f64),
    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("parameter {index} is not a strict contraction (norm {norm})")]
    NonContractive { index: usize, norm: f64 },
    #[error("parameter {index} has norm {norm} close to 1 but is not unitary")]
    DegenerateParameter { index: usize, norm: f64 },
    #[error("terminal parameter is not unitary (residual {0:e})")]
    NonUnitaryTerminal(f64),
    #[error("insufficient parameters: need {needed}, have {available}")]
    InsufficientParameters { needed: usize, available: usize },
    #[error("operation requires a terminal unitary parameter")]
    MissingTerminal,
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("window too small for exact amplitudes: horizon {horizon}, margin {margin}")]
    InexactWindow { horizon: usize, margin: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("no overlapping factorization: {0}")]
    NotOverlapping(String),
    #[error("K^dagger K is not a projection (residual {0:e})")]
    NotProjection(f64),
    #[error("factorizations are not gauge related: {0}")]
    NotGaugeRelated(String),
    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("inadmissible transform parameters: |u| + |v| = {0}")]
    InadmissibleTransform(f64),
    #[error("path length {n} exceeds the cap {cap}")]
    PathCapExceeded { n: usize, cap: usize },
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
