//! Error types for problem evaluation and solvers.

use crate::linalg::Complex64;

/// Errors raised while evaluating a nonlinear eigenvalue problem.
#[derive(Debug, thiserror::Error)]
pub enum NepError {
    /// Operand shapes do not conform.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// No compute route exists for the requested quantity.
    #[error("capability not available: {0}")]
    Capability(String),

    /// An evaluation point hit a declared singularity (pole, branch cut).
    #[error("domain error at lambda = {lambda}: {reason}")]
    Domain { lambda: Complex64, reason: String },

    /// A matrix-function evaluation failed; `term` is the index of the
    /// offending sum-of-products term.
    #[error("matrix function evaluation failed for term {term}: {source}")]
    MatrixFunction {
        term: usize,
        #[source]
        source: Box<NepError>,
    },

    /// `M(lambda)` is numerically singular; informative, since this means
    /// `lambda` is at (or very near) an eigenvalue.
    #[error("singular system: M(lambda) at lambda = {lambda} is numerically singular")]
    SingularSystem { lambda: Complex64 },

    /// A shift coincides with the spectrum of a deflated invariant pair.
    #[error("singular shift: {lambda} lies in the spectrum of the deflated pair")]
    SingularShift { lambda: Complex64 },

    /// A projection basis lost full column rank.
    #[error("rank-deficient projection basis (numerical rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },

    /// Dense eigendecomposition failure.
    #[error("eigendecomposition failed: {0}")]
    EigFailed(String),

    /// Invalid argument to a constructor or transformation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl NepError {
    /// True when the root cause is a domain error (possibly wrapped in a
    /// per-term matrix-function error).
    pub fn is_domain(&self) -> bool {
        match self {
            NepError::Domain { .. } => true,
            NepError::MatrixFunction { source, .. } => source.is_domain(),
            _ => false,
        }
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        NepError::Dimension(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        NepError::Capability(msg.into())
    }

    pub(crate) fn domain(lambda: Complex64, reason: impl Into<String>) -> Self {
        NepError::Domain {
            lambda,
            reason: reason.into(),
        }
    }

    pub(crate) fn matrix_function(term: usize, source: NepError) -> Self {
        NepError::MatrixFunction {
            term,
            source: Box::new(source),
        }
    }

    pub(crate) fn eig_failed(msg: impl Into<String>) -> Self {
        NepError::EigFailed(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        NepError::InvalidArgument(msg.into())
    }
}

/// Errors raised by eigensolvers.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    /// Iteration budget exhausted. Carries the best iterate(s) found so far
    /// together with the recorded error history.
    #[error("no convergence after {iterations} iterations (best error {best_error:.3e})")]
    NoConvergence {
        iterations: usize,
        best_error: f64,
        outcome: Box<crate::solvers::SolveOutcome>,
    },

    /// The Beyn rank test consumed the whole probing space; the caller
    /// should increase the probing rank.
    #[error("rank test failed: numerical rank {rank} equals probing rank; increase the probe size")]
    RankTestFailed { rank: usize },

    /// A quadrature node sits on (or numerically at) an eigenvalue.
    #[error("quadrature node {node} at {point} hit a singular system")]
    QuadratureSingularity { node: usize, point: Complex64 },

    /// Underlying problem evaluation failed.
    #[error(transparent)]
    Nep(#[from] NepError),
}

impl SolverError {
    /// Convenience accessor: the partial outcome carried by
    /// [`SolverError::NoConvergence`], if any.
    pub fn partial_outcome(&self) -> Option<&crate::solvers::SolveOutcome> {
        match self {
            SolverError::NoConvergence { outcome, .. } => Some(outcome),
            _ => None,
        }
    }
}
