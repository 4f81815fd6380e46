use alloc::string::String;

use crate::lp::LpError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("marginals are not in convex order: {0}")]
    NotInConvexOrder(String),
    #[error("cost component index {index} out of range 1..={count}")]
    CostIndex { index: usize, count: usize },
    #[error("tabulated cost queried off-grid at ({x}, {y})")]
    OffGrid { x: f64, y: f64 },
    #[error("cost evaluates to a non-finite value at ({x}, {y})")]
    NonFiniteCost { x: f64, y: f64 },
    #[error("operation requires an American cost (two components, first independent of y)")]
    NotAmerican,
    #[error("{atoms} first-date atoms exceed the enumeration limit {limit}; use the alternating heuristic")]
    TooManyAtoms { atoms: usize, limit: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("internal error: {0}")]
    Internal(String),
}
