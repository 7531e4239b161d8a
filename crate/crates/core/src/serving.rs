//! Collaborative serving: updates maintain layers `1..=M`, queries finish
//! layers `M+1..=L` on demand.
//!
//! `M = 0` reproduces inference-based serving (only raw features are kept) and
//! `M = L` with the naive update strategy reproduces update-based serving
//! (final embeddings are cached and answered directly).

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::aip::{Propagator, UpdateReport, UpdateStrategy};
use crate::cache::StateCache;
use crate::error::{Error, Result};
use crate::graph::{EventKind, Graph, GraphEvent, NodeId};
use crate::model::{inference_with_closure, DenseVec, Features, LayerSource, ModelSpec};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServingMode {
    /// Split at a tunable `M`.
    #[serde(alias = "stag")]
    Collaborative,
    InfBased,
    UpdBased,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServingConfig {
    #[serde(rename = "M")]
    pub m: usize,
    pub update_strategy: UpdateStrategy,
    pub mode: ServingMode,
}

impl ServingConfig {
    pub fn collaborative(m: usize, update_strategy: UpdateStrategy) -> Self {
        ServingConfig {
            m,
            update_strategy,
            mode: ServingMode::Collaborative,
        }
    }

    pub fn inf_based() -> Self {
        ServingConfig {
            m: 0,
            update_strategy: UpdateStrategy::Aip,
            mode: ServingMode::InfBased,
        }
    }

    pub fn upd_based(depth: usize) -> Self {
        ServingConfig {
            m: depth,
            update_strategy: UpdateStrategy::Naive,
            mode: ServingMode::UpdBased,
        }
    }

    /// Applies the mode constraints for a model of the given depth.
    pub fn normalized(self, depth: usize) -> Result<Self> {
        match self.mode {
            ServingMode::InfBased => Ok(Self::inf_based()),
            ServingMode::UpdBased => Ok(Self::upd_based(depth)),
            ServingMode::Collaborative if self.m > depth => Err(Error::OutOfRange {
                value: self.m,
                max: depth,
            }),
            ServingMode::Collaborative => Ok(self),
        }
    }
}

/// How request service time is charged.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostClock {
    /// Touched nodes times a fixed per-node cost, in seconds.
    Logical { unit_cost: f64 },
    /// Measured wall-clock compute time.
    Wall,
}

impl CostClock {
    pub fn charge(&self, touched: usize, wall_secs: f64) -> f64 {
        match self {
            CostClock::Logical { unit_cost } => touched as f64 * unit_cost,
            CostClock::Wall => wall_secs,
        }
    }
}

impl Default for CostClock {
    fn default() -> Self {
        CostClock::Logical { unit_cost: 1e-5 }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub target: NodeId,
    pub issued_at: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryResponse {
    pub target: NodeId,
    /// Layer-`L` representation.
    pub embedding: DenseVec,
    pub started_at: f64,
    pub done_at: f64,
    pub latency: f64,
    pub staleness: f64,
    pub touched_nodes: usize,
}

/// Update outcome with its charged service time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppliedUpdate {
    pub report: UpdateReport,
    pub service_time: f64,
}

/// Nodes whose served values are stale until an admitted update completes.
#[derive(Clone, Debug, PartialEq)]
pub struct PendingUpdate {
    pub seq: u64,
    pub arrived_at: f64,
    marked: Vec<NodeId>,
}

impl PendingUpdate {
    pub fn marked(&self) -> &[NodeId] {
        &self.marked
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconfigReport {
    pub old_m: usize,
    pub new_m: usize,
    pub rebuild_micros: u64,
    pub touched_nodes: usize,
    pub service_time: f64,
}

struct CachedLayer<'a> {
    graph: &'a Graph,
    cache: &'a StateCache,
    layer: usize,
}

impl LayerSource for CachedLayer<'_> {
    fn row(&self, v: NodeId) -> Option<&[f64]> {
        self.graph
            .contains(v)
            .then(|| self.cache.layer(self.layer).h(v))
    }
}

pub struct Server {
    graph: Graph,
    model: ModelSpec,
    cache: StateCache,
    cfg: ServingConfig,
    clock: CostClock,
    propagator: Propagator,
    seq: u64,
    /// Arrival times of admitted, uncompleted updates per marked node, FIFO.
    pending: HashMap<NodeId, VecDeque<f64>>,
}

impl Server {
    pub fn new(
        graph: Graph,
        model: ModelSpec,
        cfg: ServingConfig,
        clock: CostClock,
    ) -> Result<Self> {
        if graph.feature_dim() != model.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.input_dim(),
                got: graph.feature_dim(),
            });
        }
        let cfg = cfg.normalized(model.depth())?;
        let mut cache = StateCache::new();
        cache.rebuild_all(&graph, &model, cfg.m, 0)?;
        Ok(Server {
            graph,
            model,
            cache,
            cfg,
            clock,
            propagator: Propagator::new(),
            seq: 0,
            pending: HashMap::new(),
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn cache(&self) -> &StateCache {
        &self.cache
    }

    pub fn config(&self) -> ServingConfig {
        self.cfg
    }

    pub fn clock(&self) -> CostClock {
        self.clock
    }

    pub fn m(&self) -> usize {
        self.cfg.m
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn propagator_mut(&mut self) -> &mut Propagator {
        &mut self.propagator
    }

    pub fn set_update_strategy(&mut self, strategy: UpdateStrategy) {
        self.cfg.update_strategy = strategy;
    }

    /// Registers an arrived update: every node whose layer-`M` value it will
    /// change is marked affected at the event time.
    pub fn admit_update(&mut self, event: &GraphEvent) -> Result<PendingUpdate> {
        let seeds: Vec<NodeId> = match &event.kind {
            EventKind::UpdateFeature { node, .. } => vec![*node],
            EventKind::AddEdge { dst, .. } | EventKind::RemoveEdge { dst, .. } => vec![*dst],
            EventKind::RemoveNode { node } if self.graph.contains(*node) => {
                let mut s = self.graph.out_neighbors(*node).to_vec();
                s.push(*node);
                s
            }
            EventKind::RemoveNode { .. } | EventKind::AddNode { .. } => Vec::new(),
        };
        let seeds: Vec<NodeId> = seeds
            .into_iter()
            .filter(|v| self.graph.contains(*v))
            .collect();
        let marked = self.graph.k_hop_out_neighborhood(&seeds, self.cfg.m)?;
        self.cache.mark_affected(&marked, event.time);
        for v in &marked {
            self.pending.entry(*v).or_default().push_back(event.time);
        }
        Ok(PendingUpdate {
            seq: event.seq,
            arrived_at: event.time,
            marked,
        })
    }

    /// Releases the marks of an admitted update once it has been applied.
    pub fn complete_update(&mut self, pending: &PendingUpdate) {
        for v in &pending.marked {
            let Some(queue) = self.pending.get_mut(v) else {
                continue;
            };
            if let Some(pos) = queue.iter().position(|t| *t == pending.arrived_at) {
                queue.remove(pos);
            }
            self.cache.clear_affected(&[*v]);
            match queue.iter().copied().reduce(f64::min) {
                Some(t) => self.cache.mark_affected(&[*v], t),
                None => {
                    self.pending.remove(v);
                }
            }
        }
    }

    /// Mutates the graph and refreshes cached layers `1..=M`.
    pub fn apply_update(&mut self, event: &GraphEvent) -> Result<AppliedUpdate> {
        self.seq = self.seq.max(event.seq);
        let started = Instant::now();
        let report = match &event.kind {
            EventKind::RemoveNode { node } => self.remove_node(event, *node)?,
            _ => {
                let seed = self.graph.apply_event(event)?;
                self.propagator.update(
                    &self.graph,
                    &mut self.cache,
                    &self.model,
                    &seed,
                    self.seq,
                    self.cfg.update_strategy,
                )?
            }
        };
        let wall = started.elapsed().as_secs_f64();
        let service_time = self.clock.charge(report.touched_nodes, wall);
        Ok(AppliedUpdate {
            report,
            service_time,
        })
    }

    /// Admit, apply and complete in one step.
    pub fn handle_update(&mut self, event: &GraphEvent) -> Result<AppliedUpdate> {
        let pending = self.admit_update(event)?;
        let out = self.apply_update(event);
        self.complete_update(&pending);
        out
    }

    /// Node removal as a sequence of edge removals followed by retirement.
    fn remove_node(&mut self, event: &GraphEvent, node: NodeId) -> Result<UpdateReport> {
        self.graph.check_node(node)?;
        let mut edges: Vec<(NodeId, NodeId)> = self
            .graph
            .in_neighbors(node)
            .iter()
            .map(|&w| (w, node))
            .collect();
        edges.extend(self.graph.out_neighbors(node).iter().map(|&w| (node, w)));
        let mut total: Option<UpdateReport> = None;
        for (src, dst) in edges {
            let sub = GraphEvent {
                seq: event.seq,
                time: event.time,
                kind: EventKind::RemoveEdge { src, dst },
            };
            let seed = self.graph.apply_event(&sub)?;
            let r = self.propagator.update(
                &self.graph,
                &mut self.cache,
                &self.model,
                &seed,
                self.seq,
                self.cfg.update_strategy,
            )?;
            total = Some(match total {
                None => r,
                Some(mut acc) => {
                    acc.touched_nodes += r.touched_nodes;
                    acc.fallbacks += r.fallbacks;
                    acc.wall_micros += r.wall_micros;
                    merge_counts(&mut acc.touched_per_layer, &r.touched_per_layer);
                    merge_counts(&mut acc.touched_edges_per_layer, &r.touched_edges_per_layer);
                    merge_counts(&mut acc.frontier_per_layer, &r.frontier_per_layer);
                    acc
                }
            });
        }
        let seed = self.graph.apply_event(event)?;
        let r = self.propagator.update(
            &self.graph,
            &mut self.cache,
            &self.model,
            &seed,
            self.seq,
            self.cfg.update_strategy,
        )?;
        Ok(total.unwrap_or(r))
    }

    /// Answers a query started at `started_at`: reads layer-`M` values of the
    /// `(L - M)`-hop in-neighborhood and runs the remaining layers.
    pub fn handle_query(&mut self, req: &QueryRequest, started_at: f64) -> Result<QueryResponse> {
        self.graph.check_node(req.target)?;
        let t0 = Instant::now();
        let m = self.cfg.m;
        let (embedding, closure) = if m == self.model.depth() {
            let (h, _) = self.cache.read_layer(&self.graph, req.target, m)?;
            (DenseVec(h.to_vec()), vec![req.target])
        } else {
            let (mut out, closure) = if m == 0 {
                inference_with_closure(
                    &self.graph,
                    &self.model,
                    &[req.target],
                    0,
                    &Features(&self.graph),
                )?
            } else {
                let base = CachedLayer {
                    graph: &self.graph,
                    cache: &self.cache,
                    layer: m,
                };
                inference_with_closure(&self.graph, &self.model, &[req.target], m, &base)?
            };
            (out.remove(&req.target).expect("target present"), closure)
        };
        let wall = t0.elapsed().as_secs_f64();
        let oldest = closure
            .iter()
            .map(|v| self.cache.affected_at(*v))
            .fold(f64::INFINITY, f64::min);
        let service = self.clock.charge(closure.len(), wall);
        let done_at = started_at + service;
        let staleness = if oldest.is_finite() {
            (done_at - oldest).max(0.0)
        } else {
            0.0
        };
        Ok(QueryResponse {
            target: req.target,
            embedding,
            started_at,
            done_at,
            latency: done_at - req.issued_at,
            staleness,
            touched_nodes: closure.len(),
        })
    }

    /// Moves the split point and rebuilds the cache eagerly.
    pub fn set_m(&mut self, new_m: usize) -> Result<ReconfigReport> {
        let depth = self.model.depth();
        if new_m > depth {
            return Err(Error::OutOfRange {
                value: new_m,
                max: depth,
            });
        }
        let old_m = self.cfg.m;
        let started = Instant::now();
        let affected: Vec<(NodeId, f64)> = self
            .pending
            .iter()
            .filter_map(|(v, q)| q.iter().copied().reduce(f64::min).map(|t| (*v, t)))
            .collect();
        self.cache
            .rebuild_all(&self.graph, &self.model, new_m, self.seq)?;
        for (v, t) in affected {
            self.cache.mark_affected(&[v], t);
        }
        self.cfg.m = new_m;
        if self.cfg.mode != ServingMode::Collaborative {
            self.cfg.mode = ServingMode::Collaborative;
        }
        let wall = started.elapsed();
        let touched = self.graph.node_count() * new_m;
        Ok(ReconfigReport {
            old_m,
            new_m,
            rebuild_micros: wall.as_micros() as u64,
            touched_nodes: touched,
            service_time: self.clock.charge(touched, wall.as_secs_f64()),
        })
    }
}

fn merge_counts(acc: &mut Vec<usize>, add: &[usize]) {
    if acc.len() < add.len() {
        acc.resize(add.len(), 0);
    }
    for (a, b) in acc.iter_mut().zip(add) {
        *a += b;
    }
}
