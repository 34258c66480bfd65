use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector has (numerically) zero norm")]
    ZeroVector,
    #[error("dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: usize, max: usize },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("non-finite value encountered: {0}")]
    NotFinite(String),
    #[error("vector is not orthogonal to the hyperplane normal (|<eta, theta>| = {0:e})")]
    NotOrthogonal(f64),
    #[error("vector is not of unit length (|eta| = {0})")]
    NotUnit(f64),
    #[error("vectors do not form an orthonormal triple with theta")]
    NotOrthonormalTriple,
    #[error("rational arithmetic overflow")]
    Overflow,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("accumulator carries no basis")]
    NoBasis,
    #[error("marginal second moment along basis vector {0} vanishes")]
    DegenerateMarginal(usize),
    #[error("base sampler is not isotropic (max covariance deviation {0:.4})")]
    NotIsotropic(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("monomial degree {0} exceeds the supported maximum 4")]
    UnsupportedDegree(u32),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
