//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by graph loading, feature evaluation, walking, and
/// the output-analysis machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input while parsing an edge list or attribute file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The input stream contained no usable records.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A node id outside `0..n`.
    #[error("node id {id} out of range (graph has {n} nodes)")]
    NodeOutOfRange { id: u32, n: usize },

    /// A walk step was requested from a degree-zero node.
    #[error("node {0} has no neighbors; walks require every node to have degree >= 1")]
    IsolatedNode(u32),

    /// An invalid feature specification.
    #[error("invalid feature spec: {0}")]
    InvalidSpec(String),

    /// Attribute table lookup or construction failure.
    #[error("attribute error: {0}")]
    Attribute(String),

    /// A parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A pivot or matrix that must be nonsingular was (numerically) singular.
    #[error("singular: {0}")]
    Singular(String),

    /// An estimator was asked for with too few observations.
    #[error("chain too short: {0}")]
    ChainTooShort(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
