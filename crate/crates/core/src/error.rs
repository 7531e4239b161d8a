use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("edge {0} -> {1} already exists")]
    DuplicateEdge(NodeId, NodeId),

    #[error("edge {0} -> {1} does not exist")]
    MissingEdge(NodeId, NodeId),

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(NodeId),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value produced at layer {layer}")]
    NonFiniteResult { layer: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("layer {layer} of node {node} is not cached")]
    LayerNotCached { node: NodeId, layer: usize },

    #[error("missing base value for node {0}")]
    MissingBaseValue(NodeId),

    #[error("inconsistent cache: {0}")]
    InconsistentCache(String),

    #[error("value {value} out of range [0, {max}]")]
    OutOfRange { value: usize, max: usize },

    #[error("insufficient samples: need {needed} distinct points, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate polynomial fit (singular normal equations)")]
    DegenerateFit,

    #[error("no feasible load under the given SLAs")]
    NoFeasibleLoad,

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}
