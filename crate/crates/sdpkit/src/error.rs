//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Numerical "soft" outcomes (iteration limits, suspected infeasibility)
/// are reported through [`crate::sdpsolve::SolveStatus`], not through this
/// type; `Error` covers contract violations and hard failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Input matrix is not symmetric beyond the admitted tolerance.
    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    /// An iterative kernel (Jacobi sweep, bisection) failed to converge.
    #[error("numerical trouble: {0}")]
    NumericalTrouble(String),

    /// Cholesky pivot of a supposedly positive definite matrix was not positive.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// Matrix failed a positive-semidefiniteness precondition.
    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    /// Problem size exceeds the documented desk-scale cap of an operation.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// Leading block of a Schur-complement split is not positive definite.
    #[error("leading block is not positive definite")]
    LeadingBlockNotPd,

    /// The linear system A_i ⊙ Y = c_i admits no solution.
    #[error("infeasible linear system in form conversion")]
    InfeasibleLinearSystem,

    /// Constraint matrices of a primal SDP are linearly dependent.
    #[error("constraint matrices are linearly dependent")]
    DependentConstraintMatrices,

    /// Aggregation received constraints over different variable counts.
    #[error("variable count mismatch: {0}")]
    VariableCountMismatch(String),

    /// A point handed to `duality_gap` is not feasible within tolerance.
    #[error("infeasible argument: {0}")]
    InfeasibleArgument(String),

    /// A verification map received an input it cannot process.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A Gram or Cholesky factorization step failed.
    #[error("factorization failure: {0}")]
    FactorizationFailure(String),

    /// The dual solution is not accurate enough to extract a convexification.
    #[error("not convexified: {0}")]
    NotConvexified(String),

    /// `convexify_lambda` requires strict positivity on the null space.
    #[error("quadratic form is not strictly positive on null(A)")]
    NotPositiveOnNullspace,

    /// `convexify_w` requires semidefiniteness on the null space.
    #[error("quadratic form is not positive semidefinite on null(A)")]
    NotPsdOnNullspace,

    /// No binary point satisfies the linear equalities of a 0-1 program.
    #[error("model has no feasible binary point")]
    InfeasibleModel,

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Vector/matrix dimensions do not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Text-format parse error with a 1-based line number.
    #[error("parse error at line {line}: {reason}")]
    ParseError { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::ParseError {
            line,
            reason: reason.into(),
        }
    }
}
