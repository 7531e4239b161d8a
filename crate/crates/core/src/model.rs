//! Message-passing layers and full (non-incremental) inference.
//!
//! Every layer follows the same three stages: a per-edge message computed from
//! the source representation, an aggregation over in-neighbors, and a dense
//! transform combining the aggregate with the node's own previous
//! representation. Messages depend on the source only, which is what lets an
//! aggregate be patched by message deltas instead of recomputed.

use std::collections::{BTreeMap, HashMap};
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggKind {
    Sum,
    Mean,
    Max,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// One weight matrix shared by the neighborhood and the node itself.
    Gcn,
    /// `W((1 + eps) h_self + h_tilde) + b` with `eps = 0`.
    Gin,
    /// Separate neighborhood and self weights.
    Sage,
}

impl Flavor {
    pub fn default_agg(self) -> AggKind {
        match self {
            Flavor::Gcn => AggKind::Mean,
            Flavor::Gin => AggKind::Sum,
            Flavor::Sage => AggKind::Max,
        }
    }
}

/// Fixed-length vector of finite floats.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVec(pub Vec<f64>);

impl DenseVec {
    pub fn zeros(dim: usize) -> Self {
        DenseVec(vec![0.0; dim])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Max-abs difference.
    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        max_abs_diff(&self.0, other)
    }
}

impl Deref for DenseVec {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for DenseVec {
    fn from(v: Vec<f64>) -> Self {
        DenseVec(v)
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(
        if a.len() == b.len() {
            0.0
        } else {
            f64::INFINITY
        },
        f64::max,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub agg: AggKind,
    pub flavor: Flavor,
    pub activation: Activation,
    /// Row-major `out_dim x in_dim`.
    pub w_neigh: Vec<f64>,
    /// Row-major `out_dim x in_dim`. Unused by the GIN flavor.
    pub w_self: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerSpec {
    /// Square pass-through layer: `w_neigh = I`, `w_self = 0`, no bias.
    pub fn identity(dim: usize, agg: AggKind) -> Self {
        let mut w = vec![0.0; dim * dim];
        for i in 0..dim {
            w[i * dim + i] = 1.0;
        }
        LayerSpec {
            in_dim: dim,
            out_dim: dim,
            agg,
            flavor: Flavor::Sage,
            activation: Activation::Identity,
            w_neigh: w,
            w_self: vec![0.0; dim * dim],
            bias: vec![0.0; dim],
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.in_dim * self.out_dim;
        if self.w_neigh.len() != n || self.w_self.len() != n || self.bias.len() != self.out_dim {
            return Err(Error::InvalidParams(
                "layer weight shapes do not match dims".into(),
            ));
        }
        let finite = self
            .w_neigh
            .iter()
            .chain(&self.w_self)
            .chain(&self.bias)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite layer weight".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub layers: Vec<LayerSpec>,
    pub flavor: Flavor,
    pub seed: u64,
}

/// On-disk model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub flavor: Flavor,
    #[serde(rename = "L")]
    pub num_layers: usize,
    /// `L + 1` entries: input feature dim followed by each layer's output dim.
    pub dims: Vec<usize>,
    #[serde(default)]
    pub agg: Option<AggKind>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        if self.dims.len() != self.num_layers + 1 {
            return Err(Error::Config(format!(
                "dims must have L + 1 = {} entries, got {}",
                self.num_layers + 1,
                self.dims.len()
            )));
        }
        init_weights(self.flavor, &self.dims, self.agg, self.seed)
    }
}

impl ModelSpec {
    pub fn new(layers: Vec<LayerSpec>, flavor: Flavor, seed: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParams(
                "model needs at least one layer".into(),
            ));
        }
        for l in &layers {
            l.validate()?;
        }
        for w in layers.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(Error::InvalidParams("layer dims do not chain".into()));
            }
        }
        Ok(ModelSpec {
            layers,
            flavor,
            seed,
        })
    }

    /// Number of layers `L`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// Representation width after `l` layers (`l = 0` is the raw feature).
    pub fn dim_at(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim()
        } else {
            self.layers[l - 1].out_dim
        }
    }

    /// 1-based layer accessor.
    pub fn layer(&self, l: usize) -> &LayerSpec {
        &self.layers[l - 1]
    }
}

/// Uniform Glorot initialization, reproducible from `seed`.
pub fn init_weights(
    flavor: Flavor,
    dims: &[usize],
    agg: Option<AggKind>,
    seed: u64,
) -> Result<ModelSpec> {
    if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidParams(format!("bad dims {dims:?}")));
    }
    let agg = agg.unwrap_or(flavor.default_agg());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = dims.len() - 1;
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (in_dim, out_dim) = (w[0], w[1]);
            let s = (6.0 / (in_dim + out_dim) as f64).sqrt();
            let mut draw =
                |k: usize| -> Vec<f64> { (0..k).map(|_| rng.random_range(-s..=s)).collect() };
            let w_neigh = draw(in_dim * out_dim);
            let w_self = match flavor {
                Flavor::Gcn => w_neigh.clone(),
                Flavor::Gin => vec![0.0; in_dim * out_dim],
                Flavor::Sage => draw(in_dim * out_dim),
            };
            let bias = draw(out_dim);
            LayerSpec {
                in_dim,
                out_dim,
                agg,
                flavor,
                activation: if i + 1 == depth {
                    Activation::Identity
                } else {
                    Activation::Relu
                },
                w_neigh,
                w_self,
                bias,
            }
        })
        .collect();
    ModelSpec::new(layers, flavor, seed)
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Message on an edge, a function of the source representation only.
pub fn msg(layer: &LayerSpec, h_src: &[f64]) -> Result<DenseVec> {
    check_dim(layer.in_dim, h_src.len())?;
    Ok(DenseVec(h_src.to_vec()))
}

/// Outcome of patching an aggregate with one message change.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ChangeOutcome {
    Applied,
    /// The removed message carried a unique extreme value; the aggregate must
    /// be rebuilt from the full in-neighborhood.
    NeedsReaggregate,
}

/// Patches an aggregate in place with a single message change. `old = None`
/// is an edge insertion, `new = None` a deletion.
///
/// `acc` holds the running sum (SUM, MEAN) or the running maximum (MAX);
/// `ties` is only read for MAX and counts how many messages attain the
/// maximum in each dimension.
pub fn agg_change(
    kind: AggKind,
    acc: &mut [f64],
    count: &mut u32,
    ties: &mut [u32],
    old: Option<&[f64]>,
    new: Option<&[f64]>,
) -> ChangeOutcome {
    match kind {
        AggKind::Sum | AggKind::Mean => {
            match (old, new) {
                (Some(o), Some(n)) => {
                    for ((a, o), n) in acc.iter_mut().zip(o).zip(n) {
                        *a += n - o;
                    }
                }
                (None, Some(n)) => {
                    for (a, n) in acc.iter_mut().zip(n) {
                        *a += n;
                    }
                    *count += 1;
                }
                (Some(o), None) => {
                    *count -= 1;
                    if *count == 0 {
                        acc.fill(0.0);
                    } else {
                        for (a, o) in acc.iter_mut().zip(o) {
                            *a -= o;
                        }
                    }
                }
                (None, None) => {}
            }
            ChangeOutcome::Applied
        }
        AggKind::Max => max_change(acc, count, ties, old, new),
    }
}

fn max_change(
    acc: &mut [f64],
    count: &mut u32,
    ties: &mut [u32],
    old: Option<&[f64]>,
    new: Option<&[f64]>,
) -> ChangeOutcome {
    match (old, new) {
        (None, Some(n)) => {
            if *count == 0 {
                acc.copy_from_slice(n);
                ties.fill(1);
            } else {
                for d in 0..acc.len() {
                    if n[d] > acc[d] {
                        acc[d] = n[d];
                        ties[d] = 1;
                    } else if n[d] == acc[d] {
                        ties[d] += 1;
                    }
                }
            }
            *count += 1;
        }
        (Some(o), None) => {
            *count -= 1;
            if *count == 0 {
                acc.fill(0.0);
                ties.fill(0);
                return ChangeOutcome::Applied;
            }
            for d in 0..acc.len() {
                if o[d] == acc[d] {
                    if ties[d] > 1 {
                        ties[d] -= 1;
                    } else {
                        return ChangeOutcome::NeedsReaggregate;
                    }
                }
            }
        }
        (Some(o), Some(n)) => {
            for d in 0..acc.len() {
                if n[d] > acc[d] {
                    acc[d] = n[d];
                    ties[d] = 1;
                } else if n[d] == acc[d] {
                    if o[d] != acc[d] {
                        ties[d] += 1;
                    }
                } else if o[d] == acc[d] {
                    if ties[d] > 1 {
                        ties[d] -= 1;
                    } else {
                        return ChangeOutcome::NeedsReaggregate;
                    }
                }
            }
        }
        (None, None) => {}
    }
    ChangeOutcome::Applied
}

/// Recomputes an aggregate from scratch over `msgs`, in iteration order.
pub fn agg_rebuild<'a, I>(
    kind: AggKind,
    msgs: I,
    acc: &mut [f64],
    count: &mut u32,
    ties: &mut [u32],
) where
    I: IntoIterator<Item = &'a [f64]>,
{
    acc.fill(0.0);
    ties.fill(0);
    *count = 0;
    for m in msgs {
        match kind {
            AggKind::Sum | AggKind::Mean => {
                for (a, x) in acc.iter_mut().zip(m) {
                    *a += x;
                }
            }
            AggKind::Max => {
                if *count == 0 {
                    acc.copy_from_slice(m);
                    ties.fill(1);
                } else {
                    for d in 0..acc.len() {
                        if m[d] > acc[d] {
                            acc[d] = m[d];
                            ties[d] = 1;
                        } else if m[d] == acc[d] {
                            ties[d] += 1;
                        }
                    }
                }
            }
        }
        *count += 1;
    }
}

/// Writes the aggregated neighborhood value `h_tilde` derived from the stored
/// accumulator.
#[inline]
pub fn agg_value_into(kind: AggKind, acc: &[f64], count: u32, out: &mut [f64]) {
    match kind {
        AggKind::Mean if count > 0 => {
            let c = count as f64;
            for (o, a) in out.iter_mut().zip(acc) {
                *o = a / c;
            }
        }
        _ if count == 0 => out.fill(0.0),
        _ => out.copy_from_slice(acc),
    }
}

/// Aggregator state: accumulator plus auxiliaries.
#[derive(Clone, Debug, PartialEq)]
pub struct AggState {
    pub kind: AggKind,
    pub acc: Vec<f64>,
    pub count: u32,
    /// Per-dimension multiplicity of the maximum; empty unless MAX.
    pub ties: Vec<u32>,
}

impl AggState {
    pub fn empty(kind: AggKind, dim: usize) -> Self {
        AggState {
            kind,
            acc: vec![0.0; dim],
            count: 0,
            ties: if kind == AggKind::Max {
                vec![0; dim]
            } else {
                Vec::new()
            },
        }
    }

    pub fn value(&self) -> DenseVec {
        let mut out = vec![0.0; self.acc.len()];
        agg_value_into(self.kind, &self.acc, self.count, &mut out);
        DenseVec(out)
    }

    pub fn change(&mut self, old: Option<&[f64]>, new: Option<&[f64]>) -> ChangeOutcome {
        let mut scratch = [];
        let ties: &mut [u32] = if self.kind == AggKind::Max {
            &mut self.ties
        } else {
            &mut scratch
        };
        agg_change(self.kind, &mut self.acc, &mut self.count, ties, old, new)
    }
}

/// Aggregates a multiset of messages of dimension `dim`.
pub fn agg(kind: AggKind, dim: usize, msgs: &[DenseVec]) -> Result<AggState> {
    for m in msgs {
        check_dim(dim, m.len())?;
    }
    let mut st = AggState::empty(kind, dim);
    let mut scratch = [];
    let ties: &mut [u32] = if kind == AggKind::Max {
        &mut st.ties
    } else {
        &mut scratch
    };
    agg_rebuild(
        kind,
        msgs.iter().map(|m| &m[..]),
        &mut st.acc,
        &mut st.count,
        ties,
    );
    Ok(st)
}

/// Dense transform of one layer, written into `out` (length `out_dim`).
pub fn apply_into(
    layer: &LayerSpec,
    h_tilde: &[f64],
    h_self: &[f64],
    out: &mut [f64],
) -> Result<()> {
    check_dim(layer.in_dim, h_tilde.len())?;
    check_dim(layer.in_dim, h_self.len())?;
    check_dim(layer.out_dim, out.len())?;
    let k = layer.in_dim;
    match layer.flavor {
        Flavor::Gin => {
            for (o, (row, b)) in out
                .iter_mut()
                .zip(layer.w_neigh.chunks_exact(k).zip(&layer.bias))
            {
                let mut z = *b;
                for j in 0..k {
                    z += row[j] * (h_self[j] + h_tilde[j]);
                }
                *o = z;
            }
        }
        Flavor::Gcn | Flavor::Sage => {
            let rows = layer
                .w_neigh
                .chunks_exact(k)
                .zip(layer.w_self.chunks_exact(k));
            for (o, ((wn, ws), b)) in out.iter_mut().zip(rows.zip(&layer.bias)) {
                let mut z = *b;
                for j in 0..k {
                    z += wn[j] * h_tilde[j] + ws[j] * h_self[j];
                }
                *o = z;
            }
        }
    }
    if layer.activation == Activation::Relu {
        for o in out.iter_mut() {
            if *o < 0.0 {
                *o = 0.0;
            }
        }
    }
    if out.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteResult { layer: 0 })
    }
}

pub fn apply(layer: &LayerSpec, h_tilde: &[f64], h_self: &[f64]) -> Result<DenseVec> {
    let mut out = vec![0.0; layer.out_dim];
    apply_into(layer, h_tilde, h_self, &mut out)?;
    Ok(DenseVec(out))
}

/// Read-only per-node rows at one layer.
pub trait LayerSource {
    fn row(&self, v: NodeId) -> Option<&[f64]>;
}

impl LayerSource for HashMap<NodeId, DenseVec> {
    fn row(&self, v: NodeId) -> Option<&[f64]> {
        self.get(&v).map(|d| &d[..])
    }
}

impl LayerSource for BTreeMap<NodeId, DenseVec> {
    fn row(&self, v: NodeId) -> Option<&[f64]> {
        self.get(&v).map(|d| &d[..])
    }
}

/// Raw node features as layer 0.
pub struct Features<'a>(pub &'a Graph);

impl LayerSource for Features<'_> {
    fn row(&self, v: NodeId) -> Option<&[f64]> {
        self.0.contains(v).then(|| self.0.feature(v))
    }
}

/// Exact layer-`L` representations of `targets`, starting from the
/// layer-`from_layer` values in `base`. Touches only the
/// `(L - from_layer)`-hop in-neighborhood of the targets.
pub fn full_inference(
    g: &Graph,
    model: &ModelSpec,
    targets: &[NodeId],
    from_layer: usize,
    base: &dyn LayerSource,
) -> Result<BTreeMap<NodeId, DenseVec>> {
    Ok(inference_with_closure(g, model, targets, from_layer, base)?.0)
}

/// [`full_inference`] that also returns the in-neighborhood it read, in BFS order.
pub fn inference_with_closure(
    g: &Graph,
    model: &ModelSpec,
    targets: &[NodeId],
    from_layer: usize,
    base: &dyn LayerSource,
) -> Result<(BTreeMap<NodeId, DenseVec>, Vec<NodeId>)> {
    let depth = model.depth();
    if from_layer > depth {
        return Err(Error::OutOfRange {
            value: from_layer,
            max: depth,
        });
    }
    let hops = depth - from_layer;
    let order = g.in_distances(targets, hops)?;
    let local: HashMap<NodeId, usize> = order
        .iter()
        .enumerate()
        .map(|(i, (v, _))| (*v, i))
        .collect();

    let mut dim = model.dim_at(from_layer);
    let mut cur = Vec::with_capacity(order.len() * dim);
    for (v, _) in &order {
        let row = base.row(*v).ok_or(Error::MissingBaseValue(*v))?;
        check_dim(dim, row.len())?;
        cur.extend_from_slice(row);
    }

    let mut h_tilde = Vec::new();
    let mut ties = Vec::new();
    for step in 1..=hops {
        let layer = model.layer(from_layer + step);
        // BFS order is sorted by distance, so the nodes still needed form a prefix.
        let keep = order.partition_point(|(_, d)| *d <= hops - step);
        let mut next = vec![0.0; keep * layer.out_dim];
        h_tilde.resize(dim, 0.0);
        ties.resize(if layer.agg == AggKind::Max { dim } else { 0 }, 0);
        let mut acc = vec![0.0; dim];
        for (i, (v, _)) in order[..keep].iter().enumerate() {
            let mut count = 0;
            let rows = g.in_neighbors(*v).iter().map(|w| {
                let j = local[w];
                &cur[j * dim..(j + 1) * dim]
            });
            agg_rebuild(layer.agg, rows, &mut acc, &mut count, &mut ties);
            agg_value_into(layer.agg, &acc, count, &mut h_tilde);
            apply_into(
                layer,
                &h_tilde,
                &cur[i * dim..(i + 1) * dim],
                &mut next[i * layer.out_dim..(i + 1) * layer.out_dim],
            )
            .map_err(|_| Error::NonFiniteResult {
                layer: from_layer + step,
            })?;
        }
        cur = next;
        dim = layer.out_dim;
    }

    let out = targets
        .iter()
        .map(|t| {
            let i = local[t];
            (*t, DenseVec(cur[i * dim..(i + 1) * dim].to_vec()))
        })
        .collect();
    Ok((out, order.into_iter().map(|(v, _)| v).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DenseVec {
        DenseVec(x.to_vec())
    }

    #[test]
    fn msg_is_identity() {
        let layer = LayerSpec::identity(3, AggKind::Sum);
        assert_eq!(msg(&layer, &[0.0; 3]).unwrap(), DenseVec::zeros(3));
        assert_eq!(
            msg(&layer, &[1.5, -2.0, 3.0]).unwrap(),
            v(&[1.5, -2.0, 3.0])
        );
        let a = [0.25, 1.0, -4.0];
        let b = [1.0, 2.0, 8.0];
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let lhs = msg(&layer, &ab).unwrap();
        let ma = msg(&layer, &a).unwrap();
        let mb = msg(&layer, &b).unwrap();
        for d in 0..3 {
            assert_eq!(lhs[d], ma[d] + mb[d]);
        }
        assert!(matches!(
            msg(&layer, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn agg_examples() {
        let s = agg(AggKind::Sum, 2, &[v(&[1.0, 2.0]), v(&[3.0, 4.0])]).unwrap();
        assert_eq!(s.value(), v(&[4.0, 6.0]));
        assert_eq!(s.count, 2);
        let m = agg(AggKind::Mean, 3, &[]).unwrap();
        assert_eq!(m.value(), DenseVec::zeros(3));
        assert_eq!(m.count, 0);
        let x = agg(AggKind::Max, 2, &[v(&[1.0, 5.0]), v(&[3.0, 2.0])]).unwrap();
        assert_eq!(x.value(), v(&[3.0, 5.0]));
        assert!(agg(AggKind::Sum, 2, &[v(&[1.0])]).is_err());
    }

    #[test]
    fn max_incremental_and_fallback() {
        let mut st = agg(AggKind::Max, 1, &[v(&[5.0]), v(&[2.0]), v(&[5.0])]).unwrap();
        assert_eq!(st.ties, vec![2]);
        assert_eq!(st.change(Some(&[5.0]), None), ChangeOutcome::Applied);
        assert_eq!(st.value(), v(&[5.0]));
        assert_eq!(
            st.change(Some(&[5.0]), None),
            ChangeOutcome::NeedsReaggregate
        );
        let mut st = agg(AggKind::Max, 1, &[v(&[-3.0])]).unwrap();
        st.change(Some(&[-3.0]), None);
        assert_eq!(st.value(), v(&[0.0]));
        st.change(None, Some(&[-7.0]));
        assert_eq!(st.value(), v(&[-7.0]));
    }

    #[test]
    fn apply_zero_weights_annihilate() {
        let mut layer = LayerSpec::identity(2, AggKind::Sum);
        layer.w_neigh.fill(0.0);
        layer.activation = Activation::Relu;
        assert_eq!(
            apply(&layer, &[3.0, -1.0], &[7.0, 2.0]).unwrap(),
            DenseVec::zeros(2)
        );
    }

    #[test]
    fn apply_identity_passes_h_tilde() {
        let layer = LayerSpec::identity(3, AggKind::Mean);
        let out = apply(&layer, &[1.0, -2.0, 0.5], &[9.0, 9.0, 9.0]).unwrap();
        assert_eq!(out, v(&[1.0, -2.0, 0.5]));
    }

    #[test]
    fn apply_rejects_bad_dims() {
        let layer = LayerSpec::identity(3, AggKind::Sum);
        assert!(apply(&layer, &[1.0], &[0.0; 3]).is_err());
        assert!(apply(&layer, &[0.0; 3], &[1.0; 4]).is_err());
    }

    #[test]
    fn init_weights_is_reproducible_and_bounded() {
        let a = init_weights(Flavor::Sage, &[4, 6, 3], None, 9).unwrap();
        let b = init_weights(Flavor::Sage, &[4, 6, 3], None, 9).unwrap();
        assert_eq!(a, b);
        let s = (6.0f64 / 10.0).sqrt();
        assert!(a.layers[0].w_neigh.iter().all(|w| w.abs() <= s));
        assert_eq!(a.layers[0].activation, Activation::Relu);
        assert_eq!(a.layers[1].activation, Activation::Identity);
        let gcn = init_weights(Flavor::Gcn, &[4, 4], None, 1).unwrap();
        assert_eq!(gcn.layers[0].w_neigh, gcn.layers[0].w_self);
        assert_eq!(gcn.layers[0].agg, AggKind::Mean);
    }

    #[test]
    fn from_layer_equal_depth_returns_base() {
        let mut g = Graph::new(2);
        let a = g.add_node(&[1.0, 2.0]).unwrap();
        let b = g.add_node(&[0.0, 2.0]).unwrap();
        g.add_edge(b, a).unwrap();
        let model = init_weights(Flavor::Gin, &[2, 2], None, 3).unwrap();
        let mut base = HashMap::new();
        base.insert(a, v(&[0.5, 0.25]));
        let out = full_inference(&g, &model, &[a], 1, &base).unwrap();
        assert_eq!(out[&a], v(&[0.5, 0.25]));
        assert!(matches!(
            full_inference(&g, &model, &[a], 0, &base),
            Err(Error::MissingBaseValue(_))
        ));
    }

    #[test]
    fn isolated_node_one_layer() {
        let mut g = Graph::new(2);
        let a = g.add_node(&[1.0, -2.0]).unwrap();
        let model = init_weights(Flavor::Sage, &[2, 3], Some(AggKind::Sum), 5).unwrap();
        let out = full_inference(&g, &model, &[a], 0, &Features(&g)).unwrap();
        let expect = apply(&model.layers[0], &[0.0, 0.0], &[1.0, -2.0]).unwrap();
        assert_eq!(out[&a], expect);
    }
}
