use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node {node} out of range for a graph on {p} nodes")]
    NodeOutOfRange { node: NodeId, p: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("graph contains a directed cycle")]
    Cycle,
    #[error("edge {0} - {1} is undirected")]
    UndirectedEdge(NodeId, NodeId),
    #[error("endpoint sets must be nonempty")]
    EmptyEndpointSet,
    #[error("node {0} appears in both endpoint sets")]
    OverlappingEndpoints(NodeId),
    #[error("graphs have different node counts ({0} vs {1})")]
    SizeMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p=<n>` header")]
    MissingHeader,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeekError {
    #[error("edge {0} - {1} would be oriented both ways")]
    Conflict(NodeId, NodeId),
    #[error("directed part of the input contains a cycle")]
    DirectedCycle,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CiError {
    #[error("a query needs two distinct nodes, got {0} twice")]
    SameEndpoints(NodeId),
    #[error("node {node} out of range for {p} variables")]
    NodeOutOfRange { node: NodeId, p: usize },
    #[error("need more than {needed} samples for a conditioning set of size {cond}, have {have}")]
    InsufficientSamples { have: usize, needed: usize, cond: usize },
    #[error("conditioning covariance is singular (condition number {0:e})")]
    Singular(f64),
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("attachment count m={m} must satisfy 1 <= m < p={p}")]
    InvalidAttachment { m: usize, p: usize },
    #[error("graph family needs at least {min} nodes, got {p}")]
    TooFewNodes { min: usize, p: usize },
    #[error("noise standard deviations must be positive and one per node")]
    InvalidNoise,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LowerBoundError {
    #[error("clique size s={0} is outside the supported range")]
    OutOfRange(usize),
    #[error("conditioning trace has {w} nodes but the clique only allows {max}")]
    TraceTooLarge { w: usize, max: usize },
    #[error("trace must be a subset of the clique")]
    TraceOutsideClique,
    #[error("nodes {0} and {1} are not joined by an undirected edge of the essential graph")]
    NotUndirectedClique(NodeId, NodeId),
    #[error("{0} -> {1} is not an edge of the graph")]
    MissingEdge(NodeId, NodeId),
    #[error("clique does not contain both endpoints")]
    EndpointsOutsideClique,
    #[error("no Markov-equivalent reordering of the clique was found")]
    NoConsistentOrdering,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("nothing to aggregate")]
    EmptyGroup,
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
