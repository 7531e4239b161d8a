//! Whole-graph reference computation and random event streams shared by the
//! integration tests.
#![allow(dead_code)]

use dyngnn::graph::{perturb_feature, EventKind, Graph, GraphEvent, NodeId};
use dyngnn::model::{Activation, AggKind, Flavor, ModelSpec};
use dyngnn::StateCache;
use rand::Rng;

/// `h[l][v]` for every layer `0..=L` and node slot, recomputed from scratch
/// with plain loops. Dead slots are `None`.
pub fn oracle(g: &Graph, model: &ModelSpec) -> Vec<Vec<Option<Vec<f64>>>> {
    let n = g.capacity();
    let mut in_lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in g.nodes() {
        for w in g.out_neighbors(u) {
            in_lists[w.index()].push(u.index());
        }
    }
    let mut h: Vec<Vec<Option<Vec<f64>>>> = Vec::new();
    h.push(
        (0..n)
            .map(|i| {
                let v = NodeId(i as u32);
                g.contains(v).then(|| g.feature(v).to_vec())
            })
            .collect(),
    );
    for l in 1..=model.depth() {
        let layer = model.layer(l);
        let prev = &h[l - 1];
        let mut cur = vec![None; n];
        for i in 0..n {
            let Some(self_h) = &prev[i] else { continue };
            let k = layer.in_dim;
            let mut tilde = vec![0.0; k];
            let ins = &in_lists[i];
            if !ins.is_empty() {
                match layer.agg {
                    AggKind::Sum | AggKind::Mean => {
                        for &u in ins {
                            let m = prev[u].as_ref().unwrap();
                            for d in 0..k {
                                tilde[d] += m[d];
                            }
                        }
                        if layer.agg == AggKind::Mean {
                            for t in tilde.iter_mut() {
                                *t /= ins.len() as f64;
                            }
                        }
                    }
                    AggKind::Max => {
                        for d in 0..k {
                            let mut best = f64::NEG_INFINITY;
                            for &u in ins {
                                best = best.max(prev[u].as_ref().unwrap()[d]);
                            }
                            tilde[d] = best;
                        }
                    }
                }
            }
            let mut out = vec![0.0; layer.out_dim];
            for (r, o) in out.iter_mut().enumerate() {
                let mut z = layer.bias[r];
                for d in 0..k {
                    let wn = layer.w_neigh[r * k + d];
                    z += match layer.flavor {
                        Flavor::Gin => wn * (self_h[d] + tilde[d]),
                        Flavor::Gcn | Flavor::Sage => {
                            wn * tilde[d] + layer.w_self[r * k + d] * self_h[d]
                        }
                    };
                }
                *o = if layer.activation == Activation::Relu {
                    z.max(0.0)
                } else {
                    z
                };
            }
            cur[i] = Some(out);
        }
        h.push(cur);
    }
    h
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Largest deviation between cached layers `1..=M` and the reference.
pub fn cache_error(g: &Graph, cache: &StateCache, reference: &[Vec<Option<Vec<f64>>>]) -> f64 {
    let mut worst: f64 = 0.0;
    for l in 1..=cache.depth() {
        for v in g.nodes() {
            let want = reference[l][v.index()].as_ref().unwrap();
            worst = worst.max(max_abs(cache.layer(l).h(v), want));
        }
    }
    worst
}

/// Random valid event for `g`: feature perturbation, edge insertion or edge removal.
pub fn random_event<R: Rng>(g: &Graph, rng: &mut R, seq: u64) -> GraphEvent {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let pick = |rng: &mut R| nodes[rng.random_range(0..nodes.len())];
    let kind = loop {
        match rng.random_range(0..3) {
            0 => {
                let v = pick(rng);
                break EventKind::UpdateFeature {
                    node: v,
                    feature: perturb_feature(g.feature(v), 0.5, rng),
                };
            }
            1 => {
                let (u, v) = (pick(rng), pick(rng));
                if u != v && !g.has_edge(u, v) {
                    break EventKind::AddEdge { src: u, dst: v };
                }
            }
            _ => {
                let u = pick(rng);
                let outs = g.out_neighbors(u);
                if !outs.is_empty() {
                    break EventKind::RemoveEdge {
                        src: u,
                        dst: outs[rng.random_range(0..outs.len())],
                    };
                }
            }
        }
    };
    GraphEvent {
        seq,
        time: seq as f64,
        kind,
    }
}

/// Removal of an edge whose message is the unique per-dimension maximum at
/// its target in some layer `1..=m`, if one exists.
pub fn argmax_edge_deletion<R: Rng>(
    g: &Graph,
    reference: &[Vec<Option<Vec<f64>>>],
    m: usize,
    rng: &mut R,
    seq: u64,
) -> Option<GraphEvent> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    for _ in 0..200 {
        let v = nodes[rng.random_range(0..nodes.len())];
        let ins = g.in_neighbors(v);
        if ins.len() < 2 {
            continue;
        }
        let l = rng.random_range(1..=m);
        let prev = &reference[l - 1];
        let dim = prev[ins[0].index()].as_ref().unwrap().len();
        let d = rng.random_range(0..dim);
        let vals: Vec<f64> = ins
            .iter()
            .map(|u| prev[u.index()].as_ref().unwrap()[d])
            .collect();
        let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let winners: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] == best).collect();
        if winners.len() == 1 {
            return Some(GraphEvent {
                seq,
                time: seq as f64,
                kind: EventKind::RemoveEdge {
                    src: ins[winners[0]],
                    dst: v,
                },
            });
        }
    }
    None
}
