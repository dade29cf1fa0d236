use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("p-adic precision exhausted: result indistinguishable from zero")]
    PrecisionLoss,
    #[error("real arithmetic overflow (non-finite result)")]
    Overflow,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("numerical failure in trial {trial} (seed {seed:#018x}): {reason}")]
    TrialFailure { trial: u64, seed: u64, reason: String },
    #[error("invalid gauge: {0}")]
    InvalidGauge(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("problem too large for the exact solver: {0} atoms (cap {1})")]
    TooLarge(usize, usize),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("matrix is not hyperbolic (|trace| = {0})")]
    NotHyperbolic(f64),
    #[error("invalid representation: {0}")]
    InvalidRep(String),
    #[error("construction check failed: {0}")]
    ConstructionError(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bound violated: computed {computed} > bound {bound}")]
    BoundViolated { computed: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
