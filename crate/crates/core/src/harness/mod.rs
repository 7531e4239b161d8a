//! Workload generation, the serving simulation loop and experiment drivers.

pub mod config;
pub mod experiments;
pub mod metrics;
pub mod report;
pub mod sim;
pub mod workload;

pub use config::{GraphParams, RunConfig, ServingSpec, UpdateMix, WorkloadSpec};
pub use experiments::{ablate, peak_by_mode, peak_rps_search, PeakSearch, Variant};
pub use metrics::{MetricsRecord, RecordKind, Summary};
pub use sim::{run, simulate, Prepared, RunOutput};
