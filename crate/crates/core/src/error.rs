//! Error types shared across the engine.

use thiserror::Error;

/// Any failure the geometry engine can produce.
#[derive(Debug, Clone, Error)]
pub enum GeomError {
    /// An identifier in an expression is not a declared parameter.
    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },

    /// Evaluation left the mathematical domain (log/sqrt of a non-positive
    /// value, division by zero) or produced a non-finite number.
    #[error("domain error: {detail}")]
    DomainError { detail: String },

    /// Vector lengths or matrix shapes do not match the ambient dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Input vectors are numerically dependent (Gram matrix singular), or an
    /// immersion loses rank at the evaluated point.
    #[error("rank deficient: {detail}")]
    RankDeficient { detail: String },

    /// The iterative eigensolver did not converge.
    #[error("eigendecomposition failed to converge")]
    ConvergenceFailure,

    /// A matrix required to be positive definite is not.
    #[error("matrix is not positive definite: {detail}")]
    NotPositiveDefinite { detail: String },

    /// A vector passed as a normal direction has a tangential component.
    #[error("vector is not normal to the submanifold (tangential residual {residual:.3e})")]
    NotNormal { residual: f64 },

    /// The spectrum of -T^2 has two or more distinct intermediate clusters:
    /// the submanifold carries several slant angles and is out of scope.
    #[error("higher-order slant structure: intermediate angles {angles:?}")]
    HigherOrder { angles: Vec<f64> },

    /// Eigenvalue clusters are too close to separate; the point is degenerate.
    #[error("unclassifiable point: {detail}")]
    Unclassifiable { detail: String },

    /// An audit that needs a proper split was run where theta hits 0 or pi/2.
    #[error("improper split: {detail}")]
    ImproperSplit { detail: String },

    /// The induced metric has cross-block entries above tolerance.
    #[error("induced metric is not block diagonal: {detail}")]
    NotBlockDiagonal { detail: String },

    /// Fiber block scaling is not a single function of the base point,
    /// so the chart is not a warped product over the declared blocks.
    #[error("inconsistent fiber scaling: {detail}")]
    InconsistentScaling { detail: String },

    /// Declared blocks do not line up with the computed slant distributions.
    #[error("block structure does not match the slant split: {detail}")]
    BlockMismatch { detail: String },

    /// No catalog entry with the requested name.
    #[error("unknown fixture `{name}`")]
    UnknownFixture { name: String },

    /// Chart or block description is malformed.
    #[error("invalid chart: {detail}")]
    InvalidChart { detail: String },
}

pub type Result<T> = std::result::Result<T, GeomError>;
