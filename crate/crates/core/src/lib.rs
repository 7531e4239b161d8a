//! Serving GNN node representations over a mutating graph.
//!
//! The `L` layers of a message-passing model are split at a boundary `M`:
//! layers `1..=M` are kept up to date in a node-wise cache as graph events
//! arrive ([`aip`]), and layers `M+1..=L` are computed at query time from the
//! cached layer-`M` values ([`serving`]). The [`coordinator`] picks `M` from
//! profiled cost curves and the observed request mix, and [`harness`] drives
//! simulated workloads and records latency and staleness.

pub mod aip;
pub mod cache;
pub mod coordinator;
pub mod error;
pub mod graph;
pub mod harness;
pub mod model;
pub mod serving;

pub use aip::{Propagator, UpdateReport, UpdateStrategy};
pub use cache::StateCache;
pub use error::{Error, Result};
pub use graph::{AffectedSeed, EventKind, Graph, GraphEvent, GraphModel, NodeId};
pub use model::{AggKind, DenseVec, Flavor, ModelSpec};

pub use serving::{CostClock, QueryRequest, QueryResponse, Server, ServingConfig, ServingMode};
