//! Node-wise cache of per-layer state for layers `1..=M`.
//!
//! Each cached layer stores, per node slot, the aggregator accumulator with its
//! auxiliaries and the hidden representation. Storage is one flat array per
//! field, indexed by node id.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::model::{
    agg_rebuild, agg_value_into, apply_into, AggKind, AggState, DenseVec, ModelSpec,
};

#[derive(Clone, Debug)]
pub struct LayerStore {
    pub(crate) kind: AggKind,
    pub(crate) in_dim: usize,
    pub(crate) out_dim: usize,
    /// Running sum (SUM, MEAN) or running max (MAX), `in_dim` per node.
    pub(crate) acc: Vec<f64>,
    pub(crate) count: Vec<u32>,
    /// MAX only: per-dimension multiplicity of the maximum.
    pub(crate) ties: Vec<u32>,
    pub(crate) h: Vec<f64>,
    pub(crate) version: Vec<u64>,
}

impl LayerStore {
    fn new(kind: AggKind, in_dim: usize, out_dim: usize, slots: usize) -> Self {
        LayerStore {
            kind,
            in_dim,
            out_dim,
            acc: vec![0.0; slots * in_dim],
            count: vec![0; slots],
            ties: if kind == AggKind::Max {
                vec![0; slots * in_dim]
            } else {
                Vec::new()
            },
            h: vec![0.0; slots * out_dim],
            version: vec![0; slots],
        }
    }

    fn resize(&mut self, slots: usize) {
        self.acc.resize(slots * self.in_dim, 0.0);
        self.count.resize(slots, 0);
        if self.kind == AggKind::Max {
            self.ties.resize(slots * self.in_dim, 0);
        }
        self.h.resize(slots * self.out_dim, 0.0);
        self.version.resize(slots, 0);
    }

    #[inline]
    pub fn h(&self, v: NodeId) -> &[f64] {
        &self.h[v.index() * self.out_dim..(v.index() + 1) * self.out_dim]
    }

    #[inline]
    pub(crate) fn h_mut(&mut self, v: NodeId) -> &mut [f64] {
        &mut self.h[v.index() * self.out_dim..(v.index() + 1) * self.out_dim]
    }

    pub fn count(&self, v: NodeId) -> u32 {
        self.count[v.index()]
    }

    pub fn version(&self, v: NodeId) -> u64 {
        self.version[v.index()]
    }

    /// Split borrow of the aggregator fields of one node.
    #[inline]
    pub(crate) fn agg_parts(&mut self, v: NodeId) -> (&mut [f64], &mut u32, &mut [u32]) {
        let (i, d) = (v.index(), self.in_dim);
        let ties: &mut [u32] = if self.kind == AggKind::Max {
            &mut self.ties[i * d..(i + 1) * d]
        } else {
            &mut []
        };
        (&mut self.acc[i * d..(i + 1) * d], &mut self.count[i], ties)
    }

    #[inline]
    pub(crate) fn h_tilde_into(&self, v: NodeId, out: &mut [f64]) {
        let (i, d) = (v.index(), self.in_dim);
        agg_value_into(self.kind, &self.acc[i * d..(i + 1) * d], self.count[i], out);
    }

    fn float_count(&self) -> usize {
        self.acc.len() + self.h.len() + self.count.len() + self.ties.len()
    }
}

#[derive(Clone, Debug, Default)]
pub struct StateCache {
    layers: Vec<LayerStore>,
    affected_at: Vec<f64>,
    slots: usize,
}

impl StateCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of cached layers `M`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// 1-based cached layer.
    pub fn layer(&self, l: usize) -> &LayerStore {
        &self.layers[l - 1]
    }

    pub(crate) fn layer_mut(&mut self, l: usize) -> &mut LayerStore {
        &mut self.layers[l - 1]
    }

    /// Layer `l - 1` for reading and layer `l` for writing.
    pub(crate) fn split_at_layer(&mut self, l: usize) -> (Option<&LayerStore>, &mut LayerStore) {
        let (lo, hi) = self.layers.split_at_mut(l - 1);
        (lo.last().map(|x| &*x), &mut hi[0])
    }

    /// Cached `h^l(v)`, or the raw feature at `l = 0`. Never computes.
    pub fn read_layer<'a>(&'a self, g: &'a Graph, v: NodeId, l: usize) -> Result<(&'a [f64], u64)> {
        g.check_node(v)?;
        if l == 0 {
            return Ok((g.feature(v), 0));
        }
        if l > self.depth() {
            return Err(Error::LayerNotCached { node: v, layer: l });
        }
        let layer = self.layer(l);
        Ok((layer.h(v), layer.version(v)))
    }

    /// `h^l(v)` without bounds or liveness checks, `l <= M`.
    #[inline]
    pub(crate) fn row<'a>(&'a self, g: &'a Graph, v: NodeId, l: usize) -> &'a [f64] {
        if l == 0 {
            g.feature(v)
        } else {
            self.layers[l - 1].h(v)
        }
    }

    pub fn h_tilde(&self, v: NodeId, l: usize) -> Result<DenseVec> {
        if l == 0 || l > self.depth() {
            return Err(Error::LayerNotCached { node: v, layer: l });
        }
        let layer = self.layer(l);
        let mut out = vec![0.0; layer.in_dim];
        layer.h_tilde_into(v, &mut out);
        Ok(DenseVec(out))
    }

    pub fn agg_state(&self, v: NodeId, l: usize) -> Result<AggState> {
        if l == 0 || l > self.depth() {
            return Err(Error::LayerNotCached { node: v, layer: l });
        }
        let layer = self.layer(l);
        let (i, d) = (v.index(), layer.in_dim);
        Ok(AggState {
            kind: layer.kind,
            acc: layer.acc[i * d..(i + 1) * d].to_vec(),
            count: layer.count[i],
            ties: if layer.kind == AggKind::Max {
                layer.ties[i * d..(i + 1) * d].to_vec()
            } else {
                Vec::new()
            },
        })
    }

    /// Recomputes layers `1..=m` of every node from scratch.
    pub fn rebuild_all(&mut self, g: &Graph, model: &ModelSpec, m: usize, seq: u64) -> Result<()> {
        if m > model.depth() {
            return Err(Error::OutOfRange {
                value: m,
                max: model.depth(),
            });
        }
        self.slots = g.capacity();
        self.layers = (1..=m)
            .map(|l| {
                let spec = model.layer(l);
                LayerStore::new(spec.agg, spec.in_dim, spec.out_dim, self.slots)
            })
            .collect();
        self.affected_at = vec![f64::INFINITY; self.slots];
        let nodes: Vec<NodeId> = g.nodes().collect();
        for l in 1..=m {
            for &v in &nodes {
                self.recompute_node(g, model, v, l, seq)?;
            }
        }
        Ok(())
    }

    /// Makes room for node slots allocated after the last rebuild.
    pub fn ensure_slots(&mut self, slots: usize) {
        if slots <= self.slots {
            return;
        }
        self.slots = slots;
        for layer in &mut self.layers {
            layer.resize(slots);
        }
        self.affected_at.resize(slots, f64::INFINITY);
    }

    /// Full re-aggregation of `v` at layer `l` from the current `h^{l-1}` of its
    /// in-neighbors.
    pub(crate) fn reaggregate(&mut self, g: &Graph, v: NodeId, l: usize) {
        let (prev, cur) = self.split_at_layer(l);
        let rows = g.in_neighbors(v).iter().map(|&w| match prev {
            Some(p) => p.h(w),
            None => g.feature(w),
        });
        let kind = cur.kind;
        let (acc, count, ties) = cur.agg_parts(v);
        agg_rebuild(kind, rows, acc, count, ties);
    }

    /// Applies the layer transform for `v` from its current aggregate and
    /// `h^{l-1}(v)`, writing into `out`.
    pub(crate) fn apply_node_into(
        &self,
        g: &Graph,
        model: &ModelSpec,
        v: NodeId,
        l: usize,
        h_tilde: &mut Vec<f64>,
        out: &mut [f64],
    ) -> Result<()> {
        let layer = self.layer(l);
        h_tilde.resize(layer.in_dim, 0.0);
        layer.h_tilde_into(v, h_tilde);
        apply_into(model.layer(l), h_tilde, self.row(g, v, l - 1), out)
            .map_err(|_| Error::NonFiniteResult { layer: l })
    }

    /// Re-aggregates and re-applies `v` at layer `l`.
    pub(crate) fn recompute_node(
        &mut self,
        g: &Graph,
        model: &ModelSpec,
        v: NodeId,
        l: usize,
        seq: u64,
    ) -> Result<()> {
        self.reaggregate(g, v, l);
        let mut h_tilde = Vec::new();
        let mut out = vec![0.0; model.layer(l).out_dim];
        self.apply_node_into(g, model, v, l, &mut h_tilde, &mut out)?;
        let layer = self.layer_mut(l);
        layer.h_mut(v).copy_from_slice(&out);
        layer.version[v.index()] = seq;
        Ok(())
    }

    pub fn mark_affected(&mut self, nodes: &[NodeId], t: f64) {
        for v in nodes {
            if v.index() >= self.affected_at.len() {
                self.affected_at.resize(v.index() + 1, f64::INFINITY);
            }
            let slot = &mut self.affected_at[v.index()];
            *slot = slot.min(t);
        }
    }

    pub fn clear_affected(&mut self, nodes: &[NodeId]) {
        for v in nodes {
            if let Some(slot) = self.affected_at.get_mut(v.index()) {
                *slot = f64::INFINITY;
            }
        }
    }

    /// Earliest unreflected event time influencing `v`, `INFINITY` when fresh.
    pub fn affected_at(&self, v: NodeId) -> f64 {
        self.affected_at
            .get(v.index())
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    /// Number of cached scalars (floats plus integer auxiliaries).
    pub fn cached_floats(&self) -> usize {
        self.layers.iter().map(LayerStore::float_count).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, GraphModel};
    use crate::model::{init_weights, Flavor};

    fn setup(m: usize) -> (Graph, ModelSpec, StateCache) {
        let g = generate_synthetic(40, 3, GraphModel::Regular, 4, 2).unwrap();
        let model = init_weights(Flavor::Sage, &[4, 5, 3], Some(AggKind::Mean), 4).unwrap();
        let mut cache = StateCache::new();
        cache.rebuild_all(&g, &model, m, 0).unwrap();
        (g, model, cache)
    }

    #[test]
    fn layer_zero_is_feature() {
        let (g, _, cache) = setup(1);
        let v = NodeId(7);
        assert_eq!(cache.read_layer(&g, v, 0).unwrap().0, g.feature(v));
    }

    #[test]
    fn beyond_m_is_not_cached() {
        let (g, _, cache) = setup(1);
        assert!(matches!(
            cache.read_layer(&g, NodeId(0), 2),
            Err(Error::LayerNotCached { layer: 2, .. })
        ));
        assert!(matches!(
            cache.read_layer(&g, NodeId(99), 0),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn affected_min_and_clear() {
        let (_, _, mut cache) = setup(1);
        let v = NodeId(3);
        assert_eq!(cache.affected_at(v), f64::INFINITY);
        cache.mark_affected(&[v], 5.0);
        cache.mark_affected(&[v], 3.0);
        assert_eq!(cache.affected_at(v), 3.0);
        cache.mark_affected(&[v], 4.0);
        assert_eq!(cache.affected_at(v), 3.0);
        cache.clear_affected(&[v]);
        assert_eq!(cache.affected_at(v), f64::INFINITY);
    }

    #[test]
    fn aux_count_matches_in_degree() {
        let (g, _, cache) = setup(2);
        for v in g.nodes() {
            for l in 1..=2 {
                assert_eq!(cache.layer(l).count(v) as usize, g.in_degree(v));
            }
        }
    }

    #[test]
    fn memory_shape_is_linear() {
        let (g, _, cache) = setup(2);
        let n = g.capacity();
        // layer 1: acc 4 + h 5 + count 1; layer 2: acc 5 + h 3 + count 1
        assert_eq!(cache.cached_floats(), n * (4 + 5 + 1) + n * (5 + 3 + 1));
    }

    #[test]
    fn rebuild_rejects_m_beyond_depth() {
        let (g, model, mut cache) = setup(0);
        assert!(matches!(
            cache.rebuild_all(&g, &model, 3, 0),
            Err(Error::OutOfRange { value: 3, max: 2 })
        ));
    }
}
