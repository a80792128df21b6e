use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Dimension parameters violate 1 <= q <= n-1, 0 <= gamma <= q-1.
    #[error("invalid dimension triple (n={n}, q={q}, gamma={gamma}): require 1 <= q <= n-1 and 0 <= gamma <= q-1")]
    InvalidTriple { n: usize, q: usize, gamma: usize },

    /// Ambient dimensions of two geometric objects disagree.
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// The affine intersection system is inconsistent (parallel configuration).
    #[error("empty intersection: membership system inconsistent (residual {residual:.3e})")]
    EmptyIntersection { residual: f64 },

    /// The intersection exists but its dimension differs from the generic one.
    #[error("degenerate configuration: intersection dimension {actual}, expected {expected}")]
    DegenerateConfiguration { expected: usize, actual: usize },

    /// A Monte Carlo run exceeded its budget of rejected degenerate draws.
    #[error("degeneracy budget exceeded: {rejected} rejected draws for {n_samples} samples")]
    DegeneracyBudget { rejected: usize, n_samples: usize },

    /// The requested estimator has infinite variance or an unbounded target.
    #[error("refused: {0}")]
    Refused(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
