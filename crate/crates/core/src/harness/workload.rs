//! Poisson request streams.
//!
//! Updates are generated against a private copy of the graph and applied to it
//! in arrival order, so every event is valid when the single writer replays it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::Result;
use crate::graph::{perturb_feature, EventKind, Graph, GraphEvent, NodeId};
use crate::harness::config::WorkloadSpec;

/// Per-dimension amplitude of feature perturbations.
pub const FEATURE_NOISE: f64 = 0.1;

const MAX_TRIES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RequestBody {
    Query(NodeId),
    Update(GraphEvent),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Request {
    pub seq: u64,
    pub arrive: f64,
    pub body: RequestBody,
}

impl Request {
    pub fn is_query(&self) -> bool {
        matches!(self.body, RequestBody::Query(_))
    }
}

/// Generates all requests arriving in `[0, spec.duration)`.
pub fn generate_workload(g: &Graph, spec: &WorkloadSpec) -> Result<Vec<Request>> {
    spec.validate()?;
    let total = spec.rps_q + spec.rps_u;
    if total == 0.0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gap = Exp::new(total).expect("positive rate");
    let live: Vec<NodeId> = g.nodes().collect();
    let mut shadow = g.clone();
    let mut last_seed: Option<NodeId> = None;
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += gap.sample(&mut rng);
        if t >= spec.duration {
            break;
        }
        let seq = out.len() as u64 + 1;
        let body = if rng.random::<f64>() * total < spec.rps_q {
            let target = match last_seed {
                Some(s)
                    if spec.hot_query_fraction > 0.0
                        && rng.random::<f64>() < spec.hot_query_fraction =>
                {
                    s
                }
                _ => live[rng.random_range(0..live.len())],
            };
            RequestBody::Query(target)
        } else {
            let kind = next_update(&shadow, &live, spec, &mut rng);
            let ev = GraphEvent { seq, time: t, kind };
            shadow.apply_event(&ev)?;
            last_seed = Some(match ev.kind {
                EventKind::UpdateFeature { node, .. } => node,
                EventKind::AddEdge { dst, .. } | EventKind::RemoveEdge { dst, .. } => dst,
                EventKind::AddNode { .. } | EventKind::RemoveNode { .. } => unreachable!(),
            });
            RequestBody::Update(ev)
        };
        out.push(Request {
            seq,
            arrive: t,
            body,
        });
    }
    Ok(out)
}

fn next_update<R: Rng>(g: &Graph, live: &[NodeId], spec: &WorkloadSpec, rng: &mut R) -> EventKind {
    let mix = &spec.update_mix;
    let pick = rng.random::<f64>();
    let pick_node = |rng: &mut R| live[rng.random_range(0..live.len())];
    if pick < mix.add_edge {
        for _ in 0..MAX_TRIES {
            let (src, dst) = (pick_node(rng), pick_node(rng));
            if src != dst && !g.has_edge(src, dst) {
                return EventKind::AddEdge { src, dst };
            }
        }
    } else if pick < mix.add_edge + mix.remove_edge {
        for _ in 0..MAX_TRIES {
            let src = pick_node(rng);
            let outs = g.out_neighbors(src);
            if !outs.is_empty() {
                let dst = outs[rng.random_range(0..outs.len())];
                return EventKind::RemoveEdge { src, dst };
            }
        }
    }
    let node = pick_node(rng);
    EventKind::UpdateFeature {
        node,
        feature: perturb_feature(g.feature(node), FEATURE_NOISE, rng),
    }
}
