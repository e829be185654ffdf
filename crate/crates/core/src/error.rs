use thiserror::Error;

/// Everything that can go wrong in this crate, short of a bug.
///
/// Structural mismatches (dimensions, boundaries, map shapes) are errors;
/// violated mathematical laws are bugs and panic via debug assertions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("codomain/domain mismatch composing maps: {0}")]
    CodMismatch(String),
    #[error("cospan feet differ: {0}")]
    FootMismatch(String),
    #[error("leg is not injective: {0}")]
    NonInjectiveLeg(String),
    #[error("square has mismatched shapes: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("not infinitesimal stochastic: {0}")]
    NotInfinitesimalStochastic(String),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("map is not surjective: {0}")]
    NotSurjective(String),
    #[error("not a stochastic section: {0}")]
    NotSection(String),
    #[error("generator is not lumpable over the given partition: {0}")]
    NotLumpable(String),
    #[error("shared boundary maps disagree: {0}")]
    SharedBoundaryMismatch(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("no steady state: {0}")]
    Infeasible(String),
    #[error("non-finite floating-point value: {0}")]
    NonFinite(String),
    #[error("invalid flow schedule: {0}")]
    BadSchedule(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("invalid process description: {0}")]
    Semantic(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
