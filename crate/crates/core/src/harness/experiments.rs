//! Peak-load search and ablation variants.

use log::info;
use serde::{Deserialize, Serialize};

use crate::aip::UpdateStrategy;
use crate::error::{Error, Result};
use crate::harness::config::{RunConfig, ServingSpec};
use crate::harness::metrics::Summary;
use crate::harness::sim::{simulate, Prepared};

/// Bracketing and bisection parameters for [`peak_rps_search`].
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSearch {
    /// Lowest total load tried, in requests per second.
    pub start: f64,
    /// Upper bound on the bracketing phase.
    pub max: f64,
    /// Stop when the bracket is narrower than this fraction of its lower end.
    pub rel_tol: f64,
}

impl Default for PeakSearch {
    fn default() -> Self {
        PeakSearch {
            start: 10.0,
            max: 1e7,
            rel_tol: 0.02,
        }
    }
}

/// Whether a run at total load `rps` meets both P99 bounds.
pub fn meets_sla(
    cfg: &RunConfig,
    prep: &mut Prepared,
    rps: f64,
    latency_sla: f64,
    staleness_sla: f64,
) -> Result<(bool, Summary)> {
    let mut c = cfg.clone();
    c.workload = cfg.workload.scaled_to(rps);
    let s = simulate(&c, prep)?.summary;
    let ok = s.latency_p99 <= latency_sla && s.staleness_p99 <= staleness_sla;
    log::debug!(
        "rps={rps:.1}: p99 latency {:.3e}, p99 staleness {:.3e} -> {}",
        s.latency_p99,
        s.staleness_p99,
        if ok { "ok" } else { "violated" }
    );
    Ok((ok, s))
}

/// Largest total load (fixed query:update ratio) meeting both SLAs.
pub fn peak_rps_search(
    cfg: &RunConfig,
    prep: &mut Prepared,
    latency_sla: f64,
    staleness_sla: f64,
    search: PeakSearch,
) -> Result<f64> {
    if !(search.start > 0.0 && search.max >= search.start && search.rel_tol > 0.0) {
        return Err(Error::InvalidParams(format!("bad peak search {search:?}")));
    }
    let mut lo = search.start;
    if !meets_sla(cfg, prep, lo, latency_sla, staleness_sla)?.0 {
        return Err(Error::NoFeasibleLoad);
    }
    let mut hi = lo * 2.0;
    loop {
        if hi > search.max {
            return Ok(lo);
        }
        if !meets_sla(cfg, prep, hi, latency_sla, staleness_sla)?.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > search.rel_tol * lo {
        let mid = 0.5 * (lo + hi);
        if meets_sla(cfg, prep, mid, latency_sla, staleness_sla)?.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Serving variants compared by the ablation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Coordinator-chosen `M` with incremental propagation.
    Collaborative,
    /// Coordinator-chosen `M` with naive re-aggregation.
    NoAip,
    /// `M = L` with incremental propagation.
    NoCsm,
    InfBased,
    UpdBased,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Collaborative,
        Variant::NoAip,
        Variant::NoCsm,
        Variant::InfBased,
        Variant::UpdBased,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Collaborative => "collaborative",
            Variant::NoAip => "no_aip",
            Variant::NoCsm => "no_csm",
            Variant::InfBased => "inf_based",
            Variant::UpdBased => "upd_based",
        }
    }

    /// `base` with its serving section replaced by this variant.
    pub fn apply(self, base: &RunConfig) -> RunConfig {
        let depth = base.model.num_layers;
        let (retune, half_life, profile) = match &base.serving {
            ServingSpec::Auto {
                retune,
                half_life,
                profile,
                ..
            } => (*retune, *half_life, profile.clone()),
            _ => match ServingSpec::auto(UpdateStrategy::Aip) {
                ServingSpec::Auto {
                    retune, half_life, ..
                } => (retune, half_life, None),
                _ => unreachable!(),
            },
        };
        let auto = |update_strategy| ServingSpec::Auto {
            update_strategy,
            cost_model: None,
            profile: profile.clone(),
            retune,
            half_life,
        };
        let serving = match self {
            Variant::Collaborative => auto(UpdateStrategy::Aip),
            Variant::NoAip => auto(UpdateStrategy::Naive),
            Variant::NoCsm => ServingSpec::Collaborative {
                m: depth,
                update_strategy: UpdateStrategy::Aip,
            },
            Variant::InfBased => ServingSpec::InfBased,
            Variant::UpdBased => ServingSpec::UpdBased,
        };
        RunConfig {
            serving,
            output: None,
            updates_output: None,
            ..base.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantSummary {
    pub variant: Variant,
    pub summary: Summary,
}

/// Runs every variant at `cfg`'s workload on one prepared graph.
pub fn ablate(cfg: &RunConfig, prep: &mut Prepared) -> Result<Vec<VariantSummary>> {
    Variant::ALL
        .iter()
        .map(|&variant| {
            info!("ablation variant {}", variant.name());
            let summary = simulate(&variant.apply(cfg), prep)?.summary;
            Ok(VariantSummary { variant, summary })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakResult {
    pub variant: Variant,
    /// `None` when even the starting load violates an SLA.
    pub peak_rps: Option<f64>,
}

/// Peak load for each listed variant.
pub fn peak_by_mode(
    cfg: &RunConfig,
    prep: &mut Prepared,
    variants: &[Variant],
    latency_sla: f64,
    staleness_sla: f64,
    search: PeakSearch,
) -> Result<Vec<PeakResult>> {
    variants
        .iter()
        .map(|&variant| {
            let peak = match peak_rps_search(
                &variant.apply(cfg),
                prep,
                latency_sla,
                staleness_sla,
                search,
            ) {
                Ok(p) => Some(p),
                Err(Error::NoFeasibleLoad) => None,
                Err(e) => return Err(e),
            };
            info!("peak {}: {:?}", variant.name(), peak);
            Ok(PeakResult {
                variant,
                peak_rps: peak,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphModel;
    use crate::harness::config::{GraphParams, WorkloadSpec};
    use crate::model::{Flavor, ModelConfig};
    use crate::serving::CostClock;

    fn cfg() -> RunConfig {
        RunConfig {
            graph: GraphParams {
                n: 1000,
                c: 4,
                model: GraphModel::Regular,
                seed: 3,
                ..Default::default()
            },
            model: ModelConfig {
                flavor: Flavor::Gcn,
                num_layers: 2,
                dims: vec![4, 4, 4],
                agg: None,
                seed: 1,
            },
            serving: ServingSpec::UpdBased,
            workload: WorkloadSpec {
                rps_q: 100.0,
                rps_u: 100.0,
                duration: 1.0,
                update_mix: Default::default(),
                seed: 2,
                hot_query_fraction: 0.0,
            },
            clock: CostClock::Logical { unit_cost: 1e-4 },
            query_workers: 1,
            output: None,
            updates_output: None,
        }
    }

    #[test]
    fn infeasible_sla_is_reported() {
        let c = cfg();
        let mut prep = Prepared::new(&c).unwrap();
        let r = peak_rps_search(&c, &mut prep, 1e-9, 1e-9, PeakSearch::default());
        assert!(matches!(r, Err(Error::NoFeasibleLoad)));
    }

    #[test]
    fn peak_is_bracketed_by_sla() {
        let c = cfg();
        let mut prep = Prepared::new(&c).unwrap();
        let search = PeakSearch {
            start: 10.0,
            max: 1e6,
            rel_tol: 0.05,
        };
        let peak = peak_rps_search(&c, &mut prep, 0.05, 0.05, search).unwrap();
        assert!(peak >= 10.0);
        assert!(meets_sla(&c, &mut prep, peak, 0.05, 0.05).unwrap().0);
        assert!(!meets_sla(&c, &mut prep, peak * 1.2, 0.05, 0.05).unwrap().0);
    }

    #[test]
    fn variants_map_to_serving_specs() {
        let c = cfg();
        assert_eq!(
            Variant::NoCsm.apply(&c).serving,
            ServingSpec::Collaborative {
                m: 2,
                update_strategy: UpdateStrategy::Aip
            }
        );
        assert!(matches!(
            Variant::NoAip.apply(&c).serving,
            ServingSpec::Auto {
                update_strategy: UpdateStrategy::Naive,
                ..
            }
        ));
    }
}
