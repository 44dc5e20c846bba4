use thiserror::Error;

/// Coarse classification of failures, used by batch front-ends to pick an
/// exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// A mathematical hypothesis of the requested construction does not hold.
    Infeasible,
    /// The input is malformed (shapes, structure, non-finite entries).
    InvalidInput,
    /// A postcondition the construction guarantees was violated numerically.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("matrix is not hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is not an orthogonal projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },
    #[error("domain basis has dependent columns (numerical rank {rank} < {cols})")]
    DependentDomain { rank: usize, cols: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error(
        "restriction condition |<Ax,y>|^2 <= M_y <Ax,x> fails: ker(D^*G) is not contained in ker(G) (residual {residual:.3e})"
    )]
    RestrictionConditionFailed { residual: f64 },
    #[error("operator is not A-bounded: {0}")]
    NotABounded(String),
    #[error("functional is not f-bounded: {0}")]
    NotFBounded(String),
    #[error("operator or functional is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },
    #[error("incompatible instance: {0}")]
    IncompatibleInstance(String),
    #[error("hypothesis violated: {}", .0.join("; "))]
    HypothesisViolated(Vec<String>),
    #[error("no grid point satisfies the constraint")]
    Infeasible,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl ExtError {
    pub fn class(&self) -> ErrorClass {
        use ExtError::*;
        match self {
            DimensionMismatch(_)
            | NonFinite
            | InvalidTolerance(_)
            | NotHermitian { .. }
            | NotPsd { .. }
            | NotProjection { .. }
            | DependentDomain { .. }
            | InvalidDims(_) => ErrorClass::InvalidInput,
            RestrictionConditionFailed { .. }
            | NotABounded(_)
            | NotFBounded(_)
            | NotSymmetric { .. }
            | IncompatibleInstance(_)
            | HypothesisViolated(_)
            | Infeasible => ErrorClass::Infeasible,
            NumericalFailure(_) => ErrorClass::NumericalFailure,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        use ExtError::*;
        match self {
            DimensionMismatch(_) => "DimensionMismatch",
            NonFinite => "NonFinite",
            InvalidTolerance(_) => "InvalidTolerance",
            NotHermitian { .. } => "NotHermitian",
            NotPsd { .. } => "NotPsd",
            NotProjection { .. } => "NotProjection",
            DependentDomain { .. } => "DependentDomain",
            InvalidDims(_) => "InvalidDims",
            RestrictionConditionFailed { .. } => "RestrictionConditionFailed",
            NotABounded(_) => "NotABounded",
            NotFBounded(_) => "NotFBounded",
            NotSymmetric { .. } => "NotSymmetric",
            IncompatibleInstance(_) => "IncompatibleInstance",
            HypothesisViolated(_) => "HypothesisViolated",
            Infeasible => "Infeasible",
            NumericalFailure(_) => "NumericalFailure",
        }
    }
}

pub type Result<T> = std::result::Result<T, ExtError>;
