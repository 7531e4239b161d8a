mod common;

use common::{argmax_edge_deletion, cache_error, max_abs, oracle, random_event};
use dyngnn::graph::{generate_synthetic, GraphModel, NodeId};
use dyngnn::model::{init_weights, AggKind, Flavor};
use dyngnn::serving::{CostClock, QueryRequest, Server, ServingConfig};
use dyngnn::{Propagator, StateCache, UpdateStrategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn rebuilt_cache_matches_reference() {
    for flavor in [Flavor::Gcn, Flavor::Gin, Flavor::Sage] {
        let g = generate_synthetic(300, 5, GraphModel::ErdosRenyi, 3, 2).unwrap();
        let model = init_weights(flavor, &[3, 6, 5, 2], None, 4).unwrap();
        let reference = oracle(&g, &model);
        let mut cache = StateCache::new();
        cache.rebuild_all(&g, &model, 3, 0).unwrap();
        assert!(cache_error(&g, &cache, &reference) < 1e-12, "{flavor:?}");
    }
}

#[test]
fn every_split_answers_like_the_reference() {
    let g = generate_synthetic(400, 6, GraphModel::Regular, 4, 8).unwrap();
    let model = init_weights(Flavor::Sage, &[4, 5, 5, 3], Some(AggKind::Mean), 9).unwrap();
    let reference = oracle(&g, &model);
    for m in 0..=3 {
        let mut s = Server::new(
            g.clone(),
            model.clone(),
            ServingConfig::collaborative(m, UpdateStrategy::Aip),
            CostClock::default(),
        )
        .unwrap();
        for v in (0..400).step_by(37) {
            let r = s
                .handle_query(
                    &QueryRequest {
                        target: NodeId(v),
                        issued_at: 0.0,
                    },
                    0.0,
                )
                .unwrap();
            let want = reference[3][v as usize].as_ref().unwrap();
            assert!(max_abs(&r.embedding, want) < 1e-9, "M={m} v={v}");
        }
    }
}

#[test]
fn both_strategies_track_the_reference_per_event() {
    for (agg, flavor) in [
        (AggKind::Sum, Flavor::Gin),
        (AggKind::Mean, Flavor::Gcn),
        (AggKind::Max, Flavor::Sage),
    ] {
        for strategy in [UpdateStrategy::Aip, UpdateStrategy::Naive] {
            let mut g = generate_synthetic(120, 4, GraphModel::ErdosRenyi, 3, 17).unwrap();
            let model = init_weights(flavor, &[3, 4, 3], Some(agg), 5).unwrap();
            let mut cache = StateCache::new();
            cache.rebuild_all(&g, &model, 2, 0).unwrap();
            let mut prop = Propagator::new();
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            let mut reference = oracle(&g, &model);
            for seq in 1..=120u64 {
                let ev = if agg == AggKind::Max && seq % 4 == 0 {
                    argmax_edge_deletion(&g, &reference, 2, &mut rng, seq)
                        .unwrap_or_else(|| random_event(&g, &mut rng, seq))
                } else {
                    random_event(&g, &mut rng, seq)
                };
                let seed = g.apply_event(&ev).unwrap();
                prop.update(&g, &mut cache, &model, &seed, seq, strategy)
                    .unwrap();
                reference = oracle(&g, &model);
                let err = cache_error(&g, &cache, &reference);
                assert!(err < 1e-9, "{agg:?} {strategy} event {seq}: {err}");
            }
        }
    }
}
