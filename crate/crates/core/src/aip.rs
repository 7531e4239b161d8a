//! Incremental propagation of graph events through the cached layers.
//!
//! [`UpdateStrategy::Aip`] patches each influenced aggregate with message
//! deltas `m_new - m_old` and never reads nodes outside the influence cone of
//! the event (except for the MAX fallback, which re-aggregates when the unique
//! maximum leaves). [`UpdateStrategy::Naive`] walks the same cone but rebuilds
//! each influenced aggregate from all in-neighbors, pulling in one extra hop.
//!
//! Both strategies build the frontier layer by layer. A node enters the layer-`l`
//! frontier only if its `h^l` changed bitwise; old values come from the cache
//! before it is overwritten, so no per-edge messages are stored.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cache::StateCache;
use crate::error::{Error, Result};
use crate::graph::{AffectedSeed, Graph, NodeId};
use crate::model::{agg_change, apply_into, ChangeOutcome, ModelSpec};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateStrategy {
    #[default]
    Aip,
    Naive,
}

impl std::fmt::Display for UpdateStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UpdateStrategy::Aip => "aip",
            UpdateStrategy::Naive => "naive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpdateReport {
    pub seq: u64,
    pub strategy: UpdateStrategy,
    /// Distinct nodes read or written, including the mutated node itself.
    pub touched_nodes: usize,
    pub touched_per_layer: Vec<usize>,
    pub touched_edges_per_layer: Vec<usize>,
    pub frontier_per_layer: Vec<usize>,
    /// MAX aggregates rebuilt because their unique maximum was removed.
    pub fallbacks: usize,
    pub wall_micros: u64,
}

/// One recorded state access, for locality auditing.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Access {
    pub node: NodeId,
    pub layer: usize,
    /// Read made by a MAX full re-aggregation or by the naive strategy.
    pub reaggregation: bool,
}

/// Epoch-stamped dense set mapping node ids to small positions.
#[derive(Clone, Debug, Default)]
struct Marker {
    stamp: Vec<u32>,
    pos: Vec<u32>,
    epoch: u32,
}

impl Marker {
    fn ensure(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.pos.resize(n, 0);
        }
        if self.epoch == 0 {
            self.epoch = 1;
        }
    }

    fn clear(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    #[inline]
    fn get(&self, v: NodeId) -> Option<usize> {
        (self.stamp[v.index()] == self.epoch).then(|| self.pos[v.index()] as usize)
    }

    /// Returns the existing position or records `pos`; the flag is true when new.
    #[inline]
    fn insert(&mut self, v: NodeId, pos: usize) -> (usize, bool) {
        let i = v.index();
        if self.stamp[i] == self.epoch {
            (self.pos[i] as usize, false)
        } else {
            self.stamp[i] = self.epoch;
            self.pos[i] = pos as u32;
            (pos, true)
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Frontier {
    nodes: Vec<NodeId>,
    old: Vec<f64>,
    new: Vec<f64>,
    dim: usize,
    index: Marker,
}

impl Frontier {
    fn reset(&mut self, dim: usize) {
        self.nodes.clear();
        self.old.clear();
        self.new.clear();
        self.dim = dim;
        self.index.clear();
    }

    fn push(&mut self, v: NodeId, old: &[f64], new: &[f64]) {
        self.index.insert(v, self.nodes.len());
        self.nodes.push(v);
        self.old.extend_from_slice(old);
        self.new.extend_from_slice(new);
    }

    #[inline]
    fn old(&self, i: usize) -> &[f64] {
        &self.old[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    fn new(&self, i: usize) -> &[f64] {
        &self.new[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Clone, Debug, Default)]
struct Counter {
    all: Marker,
    layer: Marker,
    total: usize,
    layer_total: usize,
    log: Option<Vec<Access>>,
}

impl Counter {
    #[inline]
    fn touch(&mut self, v: NodeId, layer: usize, reaggregation: bool) {
        if self.all.insert(v, 0).1 {
            self.total += 1;
        }
        if self.layer.insert(v, 0).1 {
            self.layer_total += 1;
        }
        if let Some(log) = &mut self.log {
            log.push(Access {
                node: v,
                layer,
                reaggregation,
            });
        }
    }
}

#[derive(Copy, Clone, Debug)]
enum Change {
    Frontier(u32),
    Insert(NodeId),
    Remove(NodeId),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Structural {
    Insert,
    Remove,
}

/// Reusable propagation engine. Holds dense scratch sized to the graph.
#[derive(Clone, Debug, Default)]
pub struct Propagator {
    counter: Counter,
    prev: Frontier,
    next: Frontier,
    targets: Marker,
    target_nodes: Vec<NodeId>,
    reaggregate: Vec<bool>,
    changes: Vec<(u32, Change)>,
    h_tilde: Vec<f64>,
    out: Vec<f64>,
}

impl Propagator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts recording every state access made by subsequent updates.
    pub fn track_reads(&mut self, on: bool) {
        self.counter.log = on.then(Vec::new);
    }

    /// Accesses recorded by the last update, if tracking is on.
    pub fn accesses(&self) -> &[Access] {
        self.counter.log.as_deref().unwrap_or(&[])
    }

    /// Delta-based update of cached layers `1..=M` after `seed` was applied to `g`.
    pub fn propagate(
        &mut self,
        g: &Graph,
        cache: &mut StateCache,
        model: &ModelSpec,
        seed: &AffectedSeed,
        seq: u64,
    ) -> Result<UpdateReport> {
        self.run(g, cache, model, seed, seq, UpdateStrategy::Aip)
    }

    /// Same final cache state as [`Propagator::propagate`], recomputing every
    /// influenced aggregate from its whole in-neighborhood.
    pub fn naive_update(
        &mut self,
        g: &Graph,
        cache: &mut StateCache,
        model: &ModelSpec,
        seed: &AffectedSeed,
        seq: u64,
    ) -> Result<UpdateReport> {
        self.run(g, cache, model, seed, seq, UpdateStrategy::Naive)
    }

    pub fn update(
        &mut self,
        g: &Graph,
        cache: &mut StateCache,
        model: &ModelSpec,
        seed: &AffectedSeed,
        seq: u64,
        strategy: UpdateStrategy,
    ) -> Result<UpdateReport> {
        self.run(g, cache, model, seed, seq, strategy)
    }

    fn run(
        &mut self,
        g: &Graph,
        cache: &mut StateCache,
        model: &ModelSpec,
        seed: &AffectedSeed,
        seq: u64,
        strategy: UpdateStrategy,
    ) -> Result<UpdateReport> {
        let started = Instant::now();
        let m = cache.depth();
        let n = g.capacity();
        cache.ensure_slots(n);
        for mk in [
            &mut self.counter.all,
            &mut self.counter.layer,
            &mut self.targets,
            &mut self.prev.index,
            &mut self.next.index,
        ] {
            mk.ensure(n);
        }
        self.counter.all.clear();
        self.counter.total = 0;
        if let Some(log) = &mut self.counter.log {
            log.clear();
        }

        let mut report = UpdateReport {
            seq,
            strategy,
            touched_nodes: 0,
            touched_per_layer: Vec::with_capacity(m),
            touched_edges_per_layer: Vec::with_capacity(m),
            frontier_per_layer: Vec::with_capacity(m),
            fallbacks: 0,
            wall_micros: 0,
        };

        self.prev.reset(model.input_dim());
        let mut structural: Vec<(NodeId, NodeId, Structural)> = Vec::new();
        let mut added_edge = None;
        match seed {
            AffectedSeed::FeatureChanged { node, old } => {
                self.counter.touch(*node, 0, false);
                let new = g.feature(*node);
                if old.len() != new.len() {
                    return Err(Error::DimensionMismatch {
                        expected: new.len(),
                        got: old.len(),
                    });
                }
                if old.as_slice() != new {
                    self.prev.push(*node, old, new);
                }
            }
            AffectedSeed::EdgeAdded { src, dst } => {
                self.counter.touch(*dst, 0, false);
                structural.push((*src, *dst, Structural::Insert));
                added_edge = Some((*src, *dst));
            }
            AffectedSeed::EdgeRemoved { src, dst } => {
                self.counter.touch(*dst, 0, false);
                structural.push((*src, *dst, Structural::Remove));
            }
            AffectedSeed::NodeAdded { node } => {
                self.counter.touch(*node, 0, false);
                for l in 1..=m {
                    cache.recompute_node(g, model, *node, l, seq)?;
                }
                report.touched_nodes = self.counter.total;
                report.wall_micros = started.elapsed().as_micros() as u64;
                return Ok(report);
            }
            AffectedSeed::NodeRemoved { node, former_out } => {
                self.counter.touch(*node, 0, false);
                for &w in former_out {
                    self.counter.touch(w, 0, false);
                    structural.push((*node, w, Structural::Remove));
                }
            }
        }

        for l in 1..=m {
            if self.prev.nodes.is_empty() && structural.is_empty() {
                break;
            }
            self.counter.layer.clear();
            self.counter.layer_total = 0;
            let edges = self.collect_changes(g, l, &structural, added_edge);
            match strategy {
                UpdateStrategy::Aip => report.fallbacks += self.apply_deltas(g, cache, l)?,
                UpdateStrategy::Naive => self.reaggregate_targets(g, cache, l),
            }
            self.recompute_layer(g, cache, model, l, seq)?;
            report.touched_per_layer.push(self.counter.layer_total);
            report.touched_edges_per_layer.push(edges);
            report.frontier_per_layer.push(self.next.nodes.len());
            std::mem::swap(&mut self.prev, &mut self.next);
        }
        report.touched_nodes = self.counter.total;
        report.wall_micros = started.elapsed().as_micros() as u64;
        Ok(report)
    }

    /// Gathers every message change arriving at layer `l`, keyed by target.
    fn collect_changes(
        &mut self,
        g: &Graph,
        l: usize,
        structural: &[(NodeId, NodeId, Structural)],
        added_edge: Option<(NodeId, NodeId)>,
    ) -> usize {
        self.targets.clear();
        self.target_nodes.clear();
        self.changes.clear();
        let mut edges = 0;
        for (i, &w) in self.prev.nodes.iter().enumerate() {
            self.counter.touch(w, l - 1, false);
            for &a in g.out_neighbors(w) {
                if added_edge == Some((w, a)) {
                    continue;
                }
                let (t, fresh) = self.targets.insert(a, self.target_nodes.len());
                if fresh {
                    self.target_nodes.push(a);
                }
                self.changes.push((t as u32, Change::Frontier(i as u32)));
                edges += 1;
            }
        }
        for &(src, dst, kind) in structural {
            self.counter.touch(src, l - 1, false);
            let (t, fresh) = self.targets.insert(dst, self.target_nodes.len());
            if fresh {
                self.target_nodes.push(dst);
            }
            let change = match kind {
                Structural::Insert => Change::Insert(src),
                Structural::Remove => Change::Remove(src),
            };
            self.changes.push((t as u32, change));
            edges += 1;
        }
        for &a in &self.target_nodes {
            self.counter.touch(a, l, false);
        }
        edges
    }

    /// Applies message deltas to the layer-`l` aggregates. Returns the number
    /// of MAX fallbacks.
    fn apply_deltas(&mut self, g: &Graph, cache: &mut StateCache, l: usize) -> Result<usize> {
        self.reaggregate.clear();
        self.reaggregate.resize(self.target_nodes.len(), false);
        {
            let (prev_layer, cur) = cache.split_at_layer(l);
            let row = |v: NodeId| match prev_layer {
                Some(p) => p.h(v),
                None => g.feature(v),
            };
            let kind = cur.kind;
            for &(t, change) in &self.changes {
                let t = t as usize;
                if self.reaggregate[t] {
                    continue;
                }
                let a = self.target_nodes[t];
                let (old, new) = match change {
                    Change::Frontier(i) => {
                        let i = i as usize;
                        (Some(self.prev.old(i)), Some(self.prev.new(i)))
                    }
                    // The cache already holds the post-event h^{l-1}.
                    Change::Insert(src) => (None, Some(row(src))),
                    Change::Remove(src) => {
                        let old = match self.prev.index.get(src) {
                            Some(i) => self.prev.old(i),
                            None => row(src),
                        };
                        (Some(old), None)
                    }
                };
                let (acc, count, ties) = cur.agg_parts(a);
                if old.is_some() && new.is_none() && *count == 0 {
                    return Err(Error::InconsistentCache(format!(
                        "removing a message from empty aggregate of {a} at layer {l}"
                    )));
                }
                if agg_change(kind, acc, count, ties, old, new) == ChangeOutcome::NeedsReaggregate {
                    self.reaggregate[t] = true;
                }
            }
            for &a in &self.target_nodes {
                if cur.count(a) as usize != g.in_degree(a) {
                    return Err(Error::InconsistentCache(format!(
                        "aggregate count of {a} at layer {l} is {} but in-degree is {}",
                        cur.count(a),
                        g.in_degree(a)
                    )));
                }
            }
        }
        let mut fallbacks = 0;
        for (t, &a) in self.target_nodes.iter().enumerate() {
            if self.reaggregate[t] {
                for &w in g.in_neighbors(a) {
                    self.counter.touch(w, l - 1, true);
                }
                cache.reaggregate(g, a, l);
                fallbacks += 1;
            }
        }
        Ok(fallbacks)
    }

    fn reaggregate_targets(&mut self, g: &Graph, cache: &mut StateCache, l: usize) {
        for &a in &self.target_nodes {
            for &w in g.in_neighbors(a) {
                self.counter.touch(w, l - 1, true);
            }
            cache.reaggregate(g, a, l);
        }
    }

    /// Re-applies the layer transform to changed aggregates and to nodes whose
    /// own `h^{l-1}` changed, building the next frontier.
    fn recompute_layer(
        &mut self,
        g: &Graph,
        cache: &mut StateCache,
        model: &ModelSpec,
        l: usize,
        seq: u64,
    ) -> Result<()> {
        let out_dim = model.layer(l).out_dim;
        self.next.reset(out_dim);
        self.out.resize(out_dim, 0.0);
        let self_only = self
            .prev
            .nodes
            .iter()
            .copied()
            .filter(|&w| self.targets.get(w).is_none());
        let order: Vec<NodeId> = self.target_nodes.iter().copied().chain(self_only).collect();
        for a in order {
            self.counter.touch(a, l, false);
            {
                let layer = cache.layer(l);
                self.h_tilde.resize(layer.in_dim, 0.0);
                layer.h_tilde_into(a, &mut self.h_tilde);
            }
            apply_into(
                model.layer(l),
                &self.h_tilde,
                cache.row(g, a, l - 1),
                &mut self.out,
            )
            .map_err(|_| Error::NonFiniteResult { layer: l })?;
            let layer = cache.layer_mut(l);
            layer.version[a.index()] = seq;
            let cached = layer.h_mut(a);
            if cached != self.out.as_slice() {
                self.next.push(a, cached, &self.out);
                cached.copy_from_slice(&self.out);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EventKind, GraphEvent};
    use crate::model::{AggKind, DenseVec, LayerSpec};

    /// Diamond topology: u, b, c all feed a.
    fn fan_in(agg: AggKind) -> (Graph, ModelSpec, [NodeId; 4]) {
        let mut g = Graph::new(1);
        let u = g.add_node(&[1.0]).unwrap();
        let b = g.add_node(&[2.0]).unwrap();
        let c = g.add_node(&[3.0]).unwrap();
        let a = g.add_node(&[0.0]).unwrap();
        for s in [u, b, c] {
            g.add_edge(s, a).unwrap();
        }
        let model = ModelSpec::new(
            vec![LayerSpec::identity(1, agg)],
            crate::model::Flavor::Sage,
            0,
        )
        .unwrap();
        (g, model, [u, b, c, a])
    }

    fn feature_event(g: &mut Graph, v: NodeId, x: f64) -> AffectedSeed {
        g.apply_event(&GraphEvent {
            seq: 1,
            time: 0.0,
            kind: EventKind::UpdateFeature {
                node: v,
                feature: vec![x],
            },
        })
        .unwrap()
    }

    #[test]
    fn fan_in_sum_delta() {
        let (mut g, model, [u, b, c, a]) = fan_in(AggKind::Sum);
        let mut cache = StateCache::new();
        cache.rebuild_all(&g, &model, 1, 0).unwrap();
        assert_eq!(cache.h_tilde(a, 1).unwrap(), DenseVec(vec![6.0]));
        let seed = feature_event(&mut g, u, 4.0);
        let mut p = Propagator::new();
        p.track_reads(true);
        let r = p.propagate(&g, &mut cache, &model, &seed, 1).unwrap();
        assert_eq!(cache.h_tilde(a, 1).unwrap(), DenseVec(vec![9.0]));
        assert!(p.accesses().iter().all(|x| x.node != b && x.node != c));
        assert_eq!(r.touched_nodes, 2);

        let seed = feature_event(&mut g, u, 1.0);
        let r = p.naive_update(&g, &mut cache, &model, &seed, 2).unwrap();
        assert_eq!(cache.h_tilde(a, 1).unwrap(), DenseVec(vec![6.0]));
        assert!(p.accesses().iter().any(|x| x.node == b));
        assert!(p.accesses().iter().any(|x| x.node == c));
        assert_eq!(r.touched_nodes, 4);
    }

    #[test]
    fn max_argmax_deletion_falls_back() {
        let mut g = Graph::new(1);
        let x = g.add_node(&[5.0]).unwrap();
        let y = g.add_node(&[2.0]).unwrap();
        let a = g.add_node(&[0.0]).unwrap();
        g.add_edge(x, a).unwrap();
        g.add_edge(y, a).unwrap();
        let model = ModelSpec::new(
            vec![LayerSpec::identity(1, AggKind::Max)],
            crate::model::Flavor::Sage,
            0,
        )
        .unwrap();
        let mut cache = StateCache::new();
        cache.rebuild_all(&g, &model, 1, 0).unwrap();
        assert_eq!(cache.h_tilde(a, 1).unwrap(), DenseVec(vec![5.0]));
        let seed = g
            .apply_event(&GraphEvent {
                seq: 1,
                time: 0.0,
                kind: EventKind::RemoveEdge { src: x, dst: a },
            })
            .unwrap();
        let r = Propagator::new()
            .propagate(&g, &mut cache, &model, &seed, 1)
            .unwrap();
        assert_eq!(r.fallbacks, 1);
        assert_eq!(cache.h_tilde(a, 1).unwrap(), DenseVec(vec![2.0]));
    }

    #[test]
    fn edge_removal_subtracts_message() {
        let (mut g, model, [u, _, _, a]) = fan_in(AggKind::Sum);
        let mut cache = StateCache::new();
        cache.rebuild_all(&g, &model, 1, 0).unwrap();
        let seed = g
            .apply_event(&GraphEvent {
                seq: 1,
                time: 0.0,
                kind: EventKind::RemoveEdge { src: u, dst: a },
            })
            .unwrap();
        Propagator::new()
            .propagate(&g, &mut cache, &model, &seed, 1)
            .unwrap();
        assert_eq!(cache.h_tilde(a, 1).unwrap(), DenseVec(vec![5.0]));
        assert_eq!(cache.layer(1).count(a), 2);
    }

    #[test]
    fn m_zero_touches_only_seed() {
        let (mut g, model, [u, ..]) = fan_in(AggKind::Sum);
        let mut cache = StateCache::new();
        cache.rebuild_all(&g, &model, 0, 0).unwrap();
        let seed = feature_event(&mut g, u, 9.0);
        let r = Propagator::new()
            .propagate(&g, &mut cache, &model, &seed, 1)
            .unwrap();
        assert_eq!(r.touched_nodes, 1);
        assert!(r.touched_per_layer.is_empty());
    }

    #[test]
    fn corrupt_count_is_reported() {
        let (mut g, model, [u, _, _, a]) = fan_in(AggKind::Mean);
        let mut cache = StateCache::new();
        cache.rebuild_all(&g, &model, 1, 0).unwrap();
        cache.layer_mut(1).count[a.index()] = 7;
        let seed = feature_event(&mut g, u, 2.0);
        let err = Propagator::new().propagate(&g, &mut cache, &model, &seed, 1);
        assert!(matches!(err, Err(Error::InconsistentCache(_))));
    }
}
