//! TOML run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aip::UpdateStrategy;
use crate::coordinator::{ProfileParams, RetunePolicy, DEFAULT_HALF_LIFE};
use crate::error::{Error, Result};
use crate::graph::{generate_synthetic, load_edge_list, Graph, GraphModel};
use crate::model::ModelConfig;
use crate::serving::{CostClock, ServingConfig, ServingMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphParams {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_c")]
    pub c: usize,
    #[serde(default = "default_graph_model")]
    pub model: GraphModel,
    #[serde(default)]
    pub seed: u64,
    /// Load an edge list instead of generating.
    #[serde(default)]
    pub edge_list: Option<PathBuf>,
    #[serde(default)]
    pub symmetric: bool,
}

fn default_n() -> usize {
    20_000
}

fn default_c() -> usize {
    16
}

fn default_graph_model() -> GraphModel {
    GraphModel::Regular
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            n: default_n(),
            c: default_c(),
            model: default_graph_model(),
            seed: 0,
            edge_list: None,
            symmetric: false,
        }
    }
}

impl GraphParams {
    pub fn build(&self, feature_dim: usize) -> Result<Graph> {
        match &self.edge_list {
            Some(path) => {
                let (g, stats) = load_edge_list(path, feature_dim, self.seed, self.symmetric)?;
                log::info!(
                    "loaded {} edges from {} ({} duplicates, {} self-loops dropped)",
                    stats.edges,
                    path.display(),
                    stats.duplicates,
                    stats.self_loops
                );
                Ok(g)
            }
            None => generate_synthetic(self.n, self.c, self.model, feature_dim, self.seed),
        }
    }
}

/// Proportions of generated update kinds.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateMix {
    pub feature_update: f64,
    pub add_edge: f64,
    pub remove_edge: f64,
}

impl Default for UpdateMix {
    fn default() -> Self {
        UpdateMix {
            feature_update: 1.0,
            add_edge: 0.0,
            remove_edge: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    pub rps_q: f64,
    pub rps_u: f64,
    /// Arrival window in seconds.
    pub duration: f64,
    #[serde(default)]
    pub update_mix: UpdateMix,
    #[serde(default)]
    pub seed: u64,
    /// Probability that a query targets the node changed by the most recent update.
    #[serde(default)]
    pub hot_query_fraction: f64,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        let rates_ok = [self.rps_q, self.rps_u]
            .iter()
            .all(|r| r.is_finite() && *r >= 0.0);
        if !rates_ok {
            return Err(Error::Config(
                "request rates must be finite and non-negative".into(),
            ));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config("duration must be positive".into()));
        }
        let m = &self.update_mix;
        let parts = [m.feature_update, m.add_edge, m.remove_edge];
        if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(format!(
                "update mix must be non-negative and sum to 1, got {parts:?}"
            )));
        }
        if !(0.0..=1.0).contains(&self.hot_query_fraction) {
            return Err(Error::Config("hot_query_fraction must be in [0, 1]".into()));
        }
        Ok(())
    }

    /// Same mix at `total` requests per second.
    pub fn scaled_to(&self, total: f64) -> Self {
        let cur = self.rps_q + self.rps_u;
        let (fq, fu) = if cur > 0.0 {
            (self.rps_q / cur, self.rps_u / cur)
        } else {
            (0.5, 0.5)
        };
        WorkloadSpec {
            rps_q: total * fq,
            rps_u: total * fu,
            ..self.clone()
        }
    }
}

/// Fixed serving configuration or coordinator-driven `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ServingSpec {
    #[serde(alias = "stag")]
    Collaborative {
        #[serde(rename = "M")]
        m: usize,
        #[serde(default)]
        update_strategy: UpdateStrategy,
    },
    InfBased,
    UpdBased,
    Auto {
        #[serde(default)]
        update_strategy: UpdateStrategy,
        /// Previously profiled cost model; profiled at startup when absent.
        #[serde(default)]
        cost_model: Option<PathBuf>,
        #[serde(default)]
        profile: Option<ProfileParams>,
        #[serde(default)]
        retune: RetunePolicy,
        #[serde(default = "default_half_life")]
        half_life: f64,
    },
}

fn default_half_life() -> f64 {
    DEFAULT_HALF_LIFE
}

impl ServingSpec {
    pub fn auto(update_strategy: UpdateStrategy) -> Self {
        ServingSpec::Auto {
            update_strategy,
            cost_model: None,
            profile: None,
            retune: RetunePolicy::default(),
            half_life: DEFAULT_HALF_LIFE,
        }
    }

    /// Fixed configuration, or `None` for `auto`.
    pub fn fixed(&self, depth: usize) -> Option<ServingConfig> {
        match *self {
            ServingSpec::Collaborative { m, update_strategy } => Some(ServingConfig {
                m,
                update_strategy,
                mode: ServingMode::Collaborative,
            }),
            ServingSpec::InfBased => Some(ServingConfig::inf_based()),
            ServingSpec::UpdBased => Some(ServingConfig::upd_based(depth)),
            ServingSpec::Auto { .. } => None,
        }
    }

    pub fn update_strategy(&self, depth: usize) -> UpdateStrategy {
        match self {
            ServingSpec::Auto {
                update_strategy, ..
            } => *update_strategy,
            s => s
                .fixed(depth)
                .map(|c| c.update_strategy)
                .unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub graph: GraphParams,
    pub model: ModelConfig,
    pub serving: ServingSpec,
    pub workload: WorkloadSpec,
    #[serde(default)]
    pub clock: CostClock,
    /// Concurrent query executors.
    #[serde(default = "default_workers")]
    pub query_workers: usize,
    /// Per-request CSV.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Per-update CSV.
    #[serde(default)]
    pub updates_output: Option<PathBuf>,
}

fn default_workers() -> usize {
    1
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.workload.validate()?;
        if self.query_workers == 0 {
            return Err(Error::Config("query_workers must be at least 1".into()));
        }
        if self.model.dims.len() != self.model.num_layers + 1 {
            return Err(Error::Config("model dims must have L + 1 entries".into()));
        }
        if let ServingSpec::Collaborative { m, .. } = self.serving {
            if m > self.model.num_layers {
                return Err(Error::Config(format!(
                    "M={m} exceeds L={}",
                    self.model.num_layers
                )));
            }
        }
        if let CostClock::Logical { unit_cost } = self.clock {
            if !(unit_cost > 0.0 && unit_cost.is_finite()) {
                return Err(Error::Config("unit_cost must be positive".into()));
            }
        }
        Ok(())
    }
}
