use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The active-set loop in NNLS ran past its pivot budget.
    #[error("active-set iteration limit exceeded after {pivots} pivots")]
    IterationLimit { pivots: usize },

    #[error("generators are not orthonormal (Gram deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("point is not in the dual cone (max violation {violation:e})")]
    NotInDualCone { violation: f64 },

    #[error("invalid interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },

    #[error("moment fit failed with residual {residual:e}; use a denser candidate grid")]
    MomentFitFailed { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
