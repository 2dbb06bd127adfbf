use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid graph size: n = {n}, delta = {delta}")]
    InvalidSize { n: usize, delta: u32 },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) not present")]
    MissingEdge(VertexId, VertexId),
    #[error("inserting ({u}, {v}) exceeds degree cap {cap} at vertex {at}")]
    DegreeCapExceeded {
        u: VertexId,
        v: VertexId,
        at: VertexId,
        cap: u32,
    },
    #[error("inserting ({u}, {v}) closes a triangle through {via}")]
    TriangleCreated {
        u: VertexId,
        v: VertexId,
        via: VertexId,
    },
    #[error("uniform_index called with an empty range")]
    InvalidRange,
    #[error("resample budget of {limit} exhausted")]
    BudgetExhausted { limit: u64 },
    #[error("enumeration of {size} assignments exceeds cap {cap}")]
    ToyScaleExceeded { size: u128, cap: u64 },
    #[error("inconsistent log: {0}")]
    InconsistentLog(String),
    #[error("replayed draw mismatch: {0}")]
    ReplayMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invariant broken: {0}")]
    InvariantBroken(String),
    #[error("malformed input: {0}")]
    Parse(String),
}
