//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a documented precondition.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),

    /// A direction collapsed below tolerance (e.g. `toward` inside the edge).
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    /// The three normals at an edge do not have rank 2 with all coefficients
    /// nonzero, so the stress transition is undefined there.
    #[error("degenerate edge {edge}: {reason}")]
    DegenerateEdge { edge: usize, reason: String },

    /// A Cayley construction hit an empty or wrong-dimensional intermediate.
    #[error("not in general position: {0}")]
    NonGeneralPosition(String),

    #[error("surgery at position {index} not admissible: {reason}")]
    Inadmissible { index: usize, reason: String },

    #[error("cycle not resolvable: {0}")]
    Unresolvable(String),

    #[error("invalid framework: {0}")]
    InvalidFramework(String),

    /// A catalog or prism-chain builder failed a closure constraint.
    #[error("construction error: {0}")]
    Construction(String),

    #[error("unsupported cell: {0}")]
    UnsupportedCell(String),

    /// A stress propagated from an exact 1-form failed the equilibrium
    /// residual check (exactness false-positive at the tolerance boundary).
    #[error("inconsistent stress: {0}")]
    Inconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
