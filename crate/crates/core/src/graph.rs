//! Mutable directed graph with node features.
//!
//! Node ids are dense and never reused within a run: removing a node leaves a
//! dead slot behind. Adjacency lists are kept sorted by id so that every
//! consumer iterating neighbors sums floats in the same order.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// One mutation of the dynamic graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EventKind {
    AddNode { feature: Vec<f64> },
    RemoveNode { node: NodeId },
    AddEdge { src: NodeId, dst: NodeId },
    RemoveEdge { src: NodeId, dst: NodeId },
    UpdateFeature { node: NodeId, feature: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEvent {
    pub seq: u64,
    /// Logical time in seconds.
    pub time: f64,
    pub kind: EventKind,
}

/// What an applied event directly touched. Downstream propagation starts here.
#[derive(Clone, Debug, PartialEq)]
pub enum AffectedSeed {
    FeatureChanged {
        node: NodeId,
        old: Vec<f64>,
    },
    /// `dst` is the aggregation target, `src` the message source.
    EdgeAdded {
        src: NodeId,
        dst: NodeId,
    },
    EdgeRemoved {
        src: NodeId,
        dst: NodeId,
    },
    NodeAdded {
        node: NodeId,
    },
    NodeRemoved {
        node: NodeId,
        former_out: Vec<NodeId>,
    },
}

impl AffectedSeed {
    /// Directly affected nodes.
    pub fn nodes(&self) -> Vec<NodeId> {
        match self {
            AffectedSeed::FeatureChanged { node, .. } | AffectedSeed::NodeAdded { node } => {
                vec![*node]
            }
            AffectedSeed::EdgeAdded { dst, .. } | AffectedSeed::EdgeRemoved { dst, .. } => {
                vec![*dst]
            }
            AffectedSeed::NodeRemoved { former_out, .. } => former_out.clone(),
        }
    }

    /// Message source of a structural edge change.
    pub fn source(&self) -> Option<NodeId> {
        match self {
            AffectedSeed::EdgeAdded { src, .. } | AffectedSeed::EdgeRemoved { src, .. } => {
                Some(*src)
            }
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AffectedSeed::FeatureChanged { .. } => "update_feature",
            AffectedSeed::EdgeAdded { .. } => "add_edge",
            AffectedSeed::EdgeRemoved { .. } => "remove_edge",
            AffectedSeed::NodeAdded { .. } => "add_node",
            AffectedSeed::NodeRemoved { .. } => "remove_node",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    Regular,
    ErdosRenyi,
}

#[derive(Clone, Debug)]
pub struct Graph {
    feature_dim: usize,
    alive: Vec<bool>,
    features: Vec<f64>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    live: usize,
    edge_count: usize,
}

impl Graph {
    pub fn new(feature_dim: usize) -> Self {
        Graph {
            feature_dim,
            alive: Vec::new(),
            features: Vec::new(),
            out_adj: Vec::new(),
            in_adj: Vec::new(),
            live: 0,
            edge_count: 0,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Number of live nodes.
    pub fn node_count(&self) -> usize {
        self.live
    }

    /// Upper bound (exclusive) on node indices ever allocated.
    pub fn capacity(&self) -> usize {
        self.alive.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Average connectivity `c = |E| / |V|`.
    pub fn avg_connectivity(&self) -> f64 {
        if self.live == 0 {
            0.0
        } else {
            self.edge_count as f64 / self.live as f64
        }
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        self.alive.get(v.index()).copied().unwrap_or(false)
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(i, _)| NodeId(i as u32))
    }

    #[inline]
    pub fn feature(&self, v: NodeId) -> &[f64] {
        let d = self.feature_dim;
        &self.features[v.index() * d..(v.index() + 1) * d]
    }

    #[inline]
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v.index()]
    }

    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v.index()]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains(u) && self.out_adj[u.index()].binary_search(&v).is_ok()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v.index()].len()
    }

    pub fn add_node(&mut self, feature: &[f64]) -> Result<NodeId> {
        self.check_dim(feature)?;
        let id = u32::try_from(self.alive.len())
            .map_err(|_| Error::InvalidParams("node id space exhausted".into()))?;
        self.alive.push(true);
        self.features.extend_from_slice(feature);
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.live += 1;
        Ok(NodeId(id))
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let out = &mut self.out_adj[u.index()];
        match out.binary_search(&v) {
            Ok(_) => return Err(Error::DuplicateEdge(u, v)),
            Err(pos) => out.insert(pos, v),
        }
        let inc = &mut self.in_adj[v.index()];
        let pos = inc.binary_search(&u).unwrap_err();
        inc.insert(pos, u);
        self.edge_count += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        let out = &mut self.out_adj[u.index()];
        match out.binary_search(&v) {
            Ok(pos) => {
                out.remove(pos);
            }
            Err(_) => return Err(Error::MissingEdge(u, v)),
        }
        let inc = &mut self.in_adj[v.index()];
        let pos = inc.binary_search(&u).expect("in/out adjacency out of sync");
        inc.remove(pos);
        self.edge_count -= 1;
        Ok(())
    }

    /// Removes a node and all incident edges. Returns its former out-neighbors.
    pub fn remove_node(&mut self, v: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(v)?;
        let outs = std::mem::take(&mut self.out_adj[v.index()]);
        for &w in &outs {
            let inc = &mut self.in_adj[w.index()];
            let pos = inc.binary_search(&v).expect("in/out adjacency out of sync");
            inc.remove(pos);
        }
        let ins = std::mem::take(&mut self.in_adj[v.index()]);
        for &w in &ins {
            let out = &mut self.out_adj[w.index()];
            let pos = out.binary_search(&v).expect("in/out adjacency out of sync");
            out.remove(pos);
        }
        self.edge_count -= outs.len() + ins.len();
        self.alive[v.index()] = false;
        self.live -= 1;
        Ok(outs)
    }

    /// Replaces a feature vector, returning the old one.
    pub fn update_feature(&mut self, v: NodeId, feature: &[f64]) -> Result<Vec<f64>> {
        self.check_node(v)?;
        self.check_dim(feature)?;
        let d = self.feature_dim;
        let slot = &mut self.features[v.index() * d..(v.index() + 1) * d];
        let old = slot.to_vec();
        slot.copy_from_slice(feature);
        Ok(old)
    }

    pub fn apply_event(&mut self, event: &GraphEvent) -> Result<AffectedSeed> {
        let seed = match &event.kind {
            EventKind::AddNode { feature } => AffectedSeed::NodeAdded {
                node: self.add_node(feature)?,
            },
            EventKind::RemoveNode { node } => AffectedSeed::NodeRemoved {
                node: *node,
                former_out: self.remove_node(*node)?,
            },
            EventKind::AddEdge { src, dst } => {
                self.add_edge(*src, *dst)?;
                AffectedSeed::EdgeAdded {
                    src: *src,
                    dst: *dst,
                }
            }
            EventKind::RemoveEdge { src, dst } => {
                self.remove_edge(*src, *dst)?;
                AffectedSeed::EdgeRemoved {
                    src: *src,
                    dst: *dst,
                }
            }
            EventKind::UpdateFeature { node, feature } => AffectedSeed::FeatureChanged {
                node: *node,
                old: self.update_feature(*node, feature)?,
            },
        };
        #[cfg(debug_assertions)]
        for v in seed.nodes().into_iter().chain(seed.source()) {
            if self.contains(v) {
                self.check_local_symmetry(v);
            }
        }
        Ok(seed)
    }

    fn check_dim(&self, feature: &[f64]) -> Result<()> {
        if feature.len() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                got: feature.len(),
            });
        }
        Ok(())
    }

    #[cfg(debug_assertions)]
    fn check_local_symmetry(&self, v: NodeId) {
        for &w in self.out_neighbors(v) {
            debug_assert!(self.in_adj[w.index()].binary_search(&v).is_ok());
        }
        for &w in self.in_neighbors(v) {
            debug_assert!(self.out_adj[w.index()].binary_search(&v).is_ok());
        }
    }

    /// Full structural consistency check. Intended for tests.
    pub fn validate(&self) -> Result<()> {
        let mut edges = 0;
        for v in self.nodes() {
            let out = self.out_neighbors(v);
            for w in out.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InconsistentCache(format!(
                        "unsorted out list at {v}"
                    )));
                }
            }
            for &w in out {
                if w == v {
                    return Err(Error::SelfLoop(v));
                }
                if !self.contains(w) || self.in_adj[w.index()].binary_search(&v).is_err() {
                    return Err(Error::MissingEdge(v, w));
                }
            }
            edges += out.len();
            for &w in self.in_neighbors(v) {
                if !self.contains(w) || self.out_adj[w.index()].binary_search(&v).is_err() {
                    return Err(Error::MissingEdge(w, v));
                }
            }
        }
        if edges != self.edge_count {
            return Err(Error::InconsistentCache(format!(
                "edge_count {} but {} edges present",
                self.edge_count, edges
            )));
        }
        Ok(())
    }

    /// Nodes reachable from `roots` in at most `k` reverse-edge steps, sorted.
    pub fn k_hop_in_neighborhood(&self, roots: &[NodeId], k: usize) -> Result<Vec<NodeId>> {
        self.k_hop(roots, k, |g, v| g.in_neighbors(v))
    }

    /// Nodes reachable from `roots` in at most `k` forward-edge steps, sorted.
    pub fn k_hop_out_neighborhood(&self, roots: &[NodeId], k: usize) -> Result<Vec<NodeId>> {
        self.k_hop(roots, k, |g, v| g.out_neighbors(v))
    }

    /// Breadth-first distances over in-edges, in discovery order.
    pub fn in_distances(&self, roots: &[NodeId], k: usize) -> Result<Vec<(NodeId, usize)>> {
        self.bfs(roots, k, |g, v| g.in_neighbors(v))
    }

    fn k_hop<'a, F>(&'a self, roots: &[NodeId], k: usize, next: F) -> Result<Vec<NodeId>>
    where
        F: Fn(&'a Graph, NodeId) -> &'a [NodeId],
    {
        let mut out: Vec<NodeId> = self
            .bfs(roots, k, next)?
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    fn bfs<'a, F>(&'a self, roots: &[NodeId], k: usize, next: F) -> Result<Vec<(NodeId, usize)>>
    where
        F: Fn(&'a Graph, NodeId) -> &'a [NodeId],
    {
        let mut seen = HashSet::with_capacity(roots.len() * 4);
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &r in roots {
            self.check_node(r)?;
            if seen.insert(r) {
                order.push((r, 0));
                queue.push_back((r, 0));
            }
        }
        while let Some((v, d)) = queue.pop_front() {
            if d == k {
                continue;
            }
            for &w in next(self, v) {
                if seen.insert(w) {
                    order.push((w, d + 1));
                    queue.push_back((w, d + 1));
                }
            }
        }
        Ok(order)
    }

    /// Builds a graph from per-node sorted out lists and a flat feature array.
    fn from_out_lists(feature_dim: usize, out_adj: Vec<Vec<NodeId>>, features: Vec<f64>) -> Self {
        let n = out_adj.len();
        let mut in_adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut edge_count = 0;
        // Visiting sources in ascending order keeps every in list sorted.
        for (u, outs) in out_adj.iter().enumerate() {
            for &v in outs {
                in_adj[v.index()].push(NodeId(u as u32));
            }
            edge_count += outs.len();
        }
        Graph {
            feature_dim,
            alive: vec![true; n],
            features,
            out_adj,
            in_adj,
            live: n,
            edge_count,
        }
    }
}

fn random_features(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n * dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// `feature` plus independent uniform noise in `[-amplitude, amplitude]` per dimension.
pub fn perturb_feature<R: Rng + ?Sized>(feature: &[f64], amplitude: f64, rng: &mut R) -> Vec<f64> {
    feature
        .iter()
        .map(|x| x + rng.random_range(-amplitude..=amplitude))
        .collect()
}

/// Deterministic synthetic graph with `n` nodes and average connectivity `c`.
///
/// The regular model is a union of `c` random permutations, repaired by random
/// transpositions so that no self-loops or parallel edges remain; every node
/// ends with in-degree and out-degree exactly `c`.
pub fn generate_synthetic(
    n: usize,
    c: usize,
    model: GraphModel,
    feature_dim: usize,
    seed: u64,
) -> Result<Graph> {
    if c < 1 || n <= c {
        return Err(Error::InvalidParams(format!(
            "need n > c >= 1, got n={n}, c={c}"
        )));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidParams("n exceeds u32 id space".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<NodeId>> = vec![Vec::with_capacity(c); n];
    match model {
        GraphModel::Regular => {
            let mut perm: Vec<u32> = (0..n as u32).collect();
            for _ in 0..c {
                perm.shuffle(&mut rng);
                let ok = |out: &Vec<Vec<NodeId>>, x: usize, t: u32| {
                    t as usize != x && !out[x].contains(&NodeId(t))
                };
                for u in 0..n {
                    if ok(&out, u, perm[u]) {
                        continue;
                    }
                    let mut attempts = 0usize;
                    loop {
                        let w = rng.random_range(0..n);
                        if w != u && ok(&out, u, perm[w]) && ok(&out, w, perm[u]) {
                            perm.swap(u, w);
                            break;
                        }
                        attempts += 1;
                        if attempts > 100 * n {
                            return Err(Error::InvalidParams(format!(
                                "could not realize a {c}-regular graph on {n} nodes"
                            )));
                        }
                    }
                }
                for (u, &t) in perm.iter().enumerate() {
                    out[u].push(NodeId(t));
                }
            }
        }
        GraphModel::ErdosRenyi => {
            let m = n * c;
            let mut placed = 0;
            while placed < m {
                let u = rng.random_range(0..n);
                let v = rng.random_range(0..n);
                if u == v || out[u].contains(&NodeId(v as u32)) {
                    continue;
                }
                out[u].push(NodeId(v as u32));
                placed += 1;
            }
        }
    }
    for list in &mut out {
        list.sort_unstable();
    }
    let features = random_features(n, feature_dim, &mut rng);
    Ok(Graph::from_out_lists(feature_dim, out, features))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub edges: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

/// Loads a whitespace-separated `src dst` edge list. Lines starting with `#`
/// are comments. Node ids are taken as dense indices `0..=max_id`; features
/// are seeded uniform in `[-1, 1]`. With `symmetric`, every line yields both
/// directions.
pub fn load_edge_list(
    path: &Path,
    feature_dim: usize,
    seed: u64,
    symmetric: bool,
) -> Result<(Graph, LoadStats)> {
    let reader = BufReader::new(File::open(path)?);
    let mut pairs = Vec::new();
    let mut max_id: Option<u32> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut it = t.split_whitespace();
        let mut field = |name: &str| -> Result<u32> {
            let tok = it.next().ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("missing {name}"),
            })?;
            tok.parse::<u32>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad {name} {tok:?}: {e}"),
            })
        };
        let u = field("src")?;
        let v = field("dst")?;
        if it.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected exactly two fields".into(),
            });
        }
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        pairs.push((u, v));
        if symmetric {
            pairs.push((v, u));
        }
    }
    let n = max_id.map_or(0, |m| m as usize + 1);
    let mut stats = LoadStats::default();
    let mut out: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (u, v) in pairs {
        if u == v {
            stats.self_loops += 1;
            continue;
        }
        out[u as usize].push(NodeId(v));
    }
    for list in &mut out {
        let before = list.len();
        list.sort_unstable();
        list.dedup();
        stats.duplicates += before - list.len();
        stats.edges += list.len();
    }
    if stats.duplicates > 0 || stats.self_loops > 0 {
        log::warn!(
            "{}: dropped {} duplicate edges and {} self-loops",
            path.display(),
            stats.duplicates,
            stats.self_loops
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = random_features(n, feature_dim, &mut rng);
    Ok((Graph::from_out_lists(feature_dim, out, features), stats))
}

/// Writes the edge list format read by [`load_edge_list`].
pub fn write_edge_list(g: &Graph, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(File::create(path)?);
    writeln!(w, "# nodes={} edges={}", g.node_count(), g.edge_count())?;
    for u in g.nodes() {
        for v in g.out_neighbors(u) {
            writeln!(w, "{} {}", u.0, v.0)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> (Graph, NodeId, NodeId, NodeId) {
        let mut g = Graph::new(2);
        let a = g.add_node(&[1.0, 0.0]).unwrap();
        let b = g.add_node(&[0.0, 1.0]).unwrap();
        let c = g.add_node(&[1.0, 1.0]).unwrap();
        g.add_edge(a, b).unwrap();
        g.add_edge(b, c).unwrap();
        (g, a, b, c)
    }

    fn ev(kind: EventKind) -> GraphEvent {
        GraphEvent {
            seq: 1,
            time: 0.0,
            kind,
        }
    }

    #[test]
    fn add_edge_seeds_target() {
        let mut g = Graph::new(1);
        let u = g.add_node(&[0.0]).unwrap();
        let v = g.add_node(&[0.0]).unwrap();
        let seed = g
            .apply_event(&ev(EventKind::AddEdge { src: u, dst: v }))
            .unwrap();
        assert_eq!(g.in_neighbors(v), &[u]);
        assert_eq!(seed.nodes(), vec![v]);
        assert_eq!(seed.source(), Some(u));
    }

    #[test]
    fn double_remove_is_missing_edge() {
        let (mut g, a, b, _) = path3();
        g.apply_event(&ev(EventKind::RemoveEdge { src: a, dst: b }))
            .unwrap();
        let err = g.apply_event(&ev(EventKind::RemoveEdge { src: a, dst: b }));
        assert!(matches!(err, Err(Error::MissingEdge(..))));
    }

    #[test]
    fn feature_update_seeds_itself() {
        let (mut g, a, _, _) = path3();
        let seed = g
            .apply_event(&ev(EventKind::UpdateFeature {
                node: a,
                feature: vec![5.0, 5.0],
            }))
            .unwrap();
        assert_eq!(seed.nodes(), vec![a]);
        assert_eq!(
            seed,
            AffectedSeed::FeatureChanged {
                node: a,
                old: vec![1.0, 0.0]
            }
        );
        assert_eq!(g.feature(a), &[5.0, 5.0]);
    }

    #[test]
    fn error_paths() {
        let (mut g, a, b, _) = path3();
        assert!(matches!(g.add_edge(a, b), Err(Error::DuplicateEdge(..))));
        assert!(matches!(g.add_edge(a, a), Err(Error::SelfLoop(_))));
        assert!(matches!(
            g.add_edge(a, NodeId(99)),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(
            g.update_feature(a, &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn remove_node_drops_incident_edges_and_never_reuses_id() {
        let (mut g, a, b, c) = path3();
        let seed = g
            .apply_event(&ev(EventKind::RemoveNode { node: b }))
            .unwrap();
        assert_eq!(seed.nodes(), vec![c]);
        assert_eq!(g.edge_count(), 0);
        assert!(g.out_neighbors(a).is_empty());
        assert!(g.in_neighbors(c).is_empty());
        let d = g.add_node(&[0.0, 0.0]).unwrap();
        assert_eq!(d, NodeId(3));
        assert!(matches!(g.add_edge(a, b), Err(Error::UnknownNode(_))));
        g.validate().unwrap();
        assert!((g.avg_connectivity() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn k_hop_examples() {
        let (g, a, b, c) = path3();
        assert_eq!(g.k_hop_in_neighborhood(&[c], 0).unwrap(), vec![c]);
        assert_eq!(g.k_hop_in_neighborhood(&[c], 2).unwrap(), vec![a, b, c]);
        assert_eq!(g.k_hop_in_neighborhood(&[c], 1).unwrap(), vec![b, c]);
        assert_eq!(g.k_hop_out_neighborhood(&[a], 0).unwrap(), vec![a]);
        assert_eq!(g.k_hop_out_neighborhood(&[a], 2).unwrap(), vec![a, b, c]);
        assert!(matches!(
            g.k_hop_out_neighborhood(&[NodeId(7)], 1),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn regular_generator_degrees() {
        let g = generate_synthetic(100, 3, GraphModel::Regular, 4, 7).unwrap();
        for v in g.nodes() {
            assert_eq!(g.in_degree(v), 3);
            assert_eq!(g.out_neighbors(v).len(), 3);
        }
        g.validate().unwrap();
        assert_eq!(g.avg_connectivity(), 3.0);
    }

    #[test]
    fn generator_is_deterministic() {
        for model in [GraphModel::Regular, GraphModel::ErdosRenyi] {
            let a = generate_synthetic(200, 5, model, 3, 11).unwrap();
            let b = generate_synthetic(200, 5, model, 3, 11).unwrap();
            for v in a.nodes() {
                assert_eq!(a.out_neighbors(v), b.out_neighbors(v));
                assert_eq!(a.feature(v), b.feature(v));
            }
            let c = generate_synthetic(200, 5, model, 3, 12).unwrap();
            assert!(a.nodes().any(|v| a.out_neighbors(v) != c.out_neighbors(v)));
        }
    }

    #[test]
    fn generator_rejects_bad_params() {
        assert!(generate_synthetic(3, 3, GraphModel::Regular, 1, 0).is_err());
        assert!(generate_synthetic(10, 0, GraphModel::Regular, 1, 0).is_err());
    }

    #[test]
    fn features_in_unit_box() {
        let g = generate_synthetic(50, 2, GraphModel::ErdosRenyi, 8, 1).unwrap();
        assert_eq!(g.avg_connectivity(), 2.0);
        for v in g.nodes() {
            assert!(g.feature(v).iter().all(|x| (-1.0..=1.0).contains(x)));
        }
    }
}
