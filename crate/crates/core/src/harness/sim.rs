//! Discrete-event serving loop.
//!
//! A single FIFO writer applies updates in arrival order while a fixed pool of
//! query workers serves queries FIFO. Service times come from the configured
//! [`CostClock`]. Updates mark their influence at arrival and release it when
//! the writer finishes them, so queries that read a pending region report
//! positive staleness.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use log::info;

use crate::aip::UpdateStrategy;
use crate::coordinator::{
    choose_m, profile, CostModel, CostUnit, ProfileParams, RateTracker, RequestKind, Retuner,
    WorkloadStats,
};
use crate::error::Result;
use crate::graph::Graph;
use crate::harness::config::{RunConfig, ServingSpec};
use crate::harness::metrics::{
    write_records, write_update_rows, MChange, MetricsRecord, RecordKind, Summary, UpdateRow,
};
use crate::harness::workload::{generate_workload, Request, RequestBody};
use crate::model::ModelSpec;
use crate::serving::{CostClock, PendingUpdate, QueryRequest, Server, ServingConfig};

/// Graph, model and fitted cost models shared by several runs.
pub struct Prepared {
    pub graph: Graph,
    pub model: ModelSpec,
    cost_models: BTreeMap<(bool, bool), CostModel>,
}

impl Prepared {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let model = cfg.model.build()?;
        let graph = cfg.graph.build(model.input_dim())?;
        Ok(Prepared {
            graph,
            model,
            cost_models: BTreeMap::new(),
        })
    }

    pub fn from_parts(graph: Graph, model: ModelSpec) -> Self {
        Prepared {
            graph,
            model,
            cost_models: BTreeMap::new(),
        }
    }

    /// Installs a cost model to be used by `auto` runs with matching strategy and unit.
    pub fn insert_cost_model(&mut self, cm: CostModel) {
        let key = (
            cm.strategy == UpdateStrategy::Naive,
            cm.unit == CostUnit::Seconds,
        );
        self.cost_models.insert(key, cm);
    }

    fn cost_model(
        &mut self,
        strategy: UpdateStrategy,
        unit: CostUnit,
        params: Option<&ProfileParams>,
        seed: u64,
    ) -> Result<&CostModel> {
        let key = (strategy == UpdateStrategy::Naive, unit == CostUnit::Seconds);
        if !self.cost_models.contains_key(&key) {
            let params = match params {
                Some(p) => ProfileParams {
                    strategy,
                    unit,
                    ..p.clone()
                },
                None => default_profile(self.model.depth(), strategy, unit, seed),
            };
            info!("profiling cost model ({strategy}, {unit:?})");
            let cm = profile(&params, &self.model)?;
            self.cost_models.insert(key, cm);
        }
        Ok(&self.cost_models[&key])
    }
}

/// Profiling defaults: connectivities 4, 8, 16, ... with enough samples for
/// the highest fitted degree.
pub fn default_profile(
    depth: usize,
    strategy: UpdateStrategy,
    unit: CostUnit,
    seed: u64,
) -> ProfileParams {
    let count = (depth + 2).max(4);
    ProfileParams {
        c_samples: (0..count).map(|i| 4usize << i).collect(),
        n: 20_000,
        reps: 40,
        seed,
        unit,
        strategy,
        ..ProfileParams::default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    /// Sorted by `seq`; one per generated request.
    pub records: Vec<MetricsRecord>,
    pub updates: Vec<UpdateRow>,
    pub summary: Summary,
}

impl RunOutput {
    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_records(&mut buf, &self.records)?;
        Ok(buf)
    }
}

/// Loads the graph and model, runs, and writes the configured CSV files.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let mut prep = Prepared::new(cfg)?;
    if let ServingSpec::Auto {
        cost_model: Some(path),
        ..
    } = &cfg.serving
    {
        prep.insert_cost_model(CostModel::load(path)?);
    }
    let out = simulate(cfg, &mut prep)?;
    if let Some(path) = &cfg.output {
        write_records(std::fs::File::create(path)?, &out.records)?;
    }
    if let Some(path) = &cfg.updates_output {
        write_update_rows(std::fs::File::create(path)?, &out.updates)?;
    }
    Ok(out)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EventTag {
    WriterFree,
    QueryDone,
    Arrival(usize),
}

struct Event {
    time: f64,
    order: u64,
    tag: EventTag,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    /// Reversed so that `BinaryHeap` pops the earliest event; completions
    /// precede arrivals at equal times.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.tag.cmp(&self.tag))
            .then_with(|| other.order.cmp(&self.order))
    }
}

struct Auto {
    cm: CostModel,
    tracker: RateTracker,
    retuner: Retuner,
}

struct Loop<'a> {
    server: Server,
    requests: &'a [Request],
    heap: BinaryHeap<Event>,
    order: u64,
    writer_busy: bool,
    writer_queue: VecDeque<(usize, PendingUpdate)>,
    in_flight: Option<PendingUpdate>,
    idle_workers: usize,
    query_queue: VecDeque<usize>,
    records: Vec<MetricsRecord>,
    updates: Vec<UpdateRow>,
    timeline: Vec<MChange>,
    auto: Option<Auto>,
}

impl Loop<'_> {
    fn push(&mut self, time: f64, tag: EventTag) {
        self.order += 1;
        self.heap.push(Event {
            time,
            order: self.order,
            tag,
        });
    }

    fn start_writer(&mut self, now: f64) -> Result<()> {
        if let Some(auto) = &mut self.auto {
            let ws = auto.tracker.stats();
            let ws = WorkloadStats {
                c_now: self.server.graph().avg_connectivity(),
                ..ws
            };
            if let Some(new_m) = auto
                .retuner
                .maybe_retune(&ws, &auto.cm, self.server.m(), now)
            {
                let rep = self.server.set_m(new_m)?;
                info!(
                    "t={now:.3}: M {} -> {} ({} us)",
                    rep.old_m, rep.new_m, rep.rebuild_micros
                );
                self.timeline.push(MChange { t: now, m: new_m });
                self.writer_busy = true;
                self.push(now + rep.service_time, EventTag::WriterFree);
                return Ok(());
            }
        }
        let Some((i, pending)) = self.writer_queue.pop_front() else {
            self.writer_busy = false;
            return Ok(());
        };
        let req = &self.requests[i];
        let RequestBody::Update(ev) = &req.body else {
            unreachable!()
        };
        let m = self.server.m();
        let applied = self.server.apply_update(ev)?;
        let done = now + applied.service_time;
        self.in_flight = Some(pending);
        self.records.push(MetricsRecord {
            seq: req.seq,
            kind: RecordKind::Update,
            arrive_t: req.arrive,
            start_t: now,
            done_t: done,
            latency: done - req.arrive,
            staleness: None,
            touched_nodes: applied.report.touched_nodes,
            m_at_time: m,
        });
        self.updates.push(UpdateRow {
            seq: req.seq,
            strategy: applied.report.strategy,
            touched_per_layer: applied
                .report
                .touched_per_layer
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            fallbacks: applied.report.fallbacks,
            wall_micros: applied.report.wall_micros,
        });
        self.writer_busy = true;
        self.push(done, EventTag::WriterFree);
        Ok(())
    }

    fn start_query(&mut self, now: f64) -> Result<()> {
        let Some(i) = self.query_queue.pop_front() else {
            return Ok(());
        };
        let req = &self.requests[i];
        let RequestBody::Query(target) = req.body else {
            unreachable!()
        };
        let m = self.server.m();
        let resp = self.server.handle_query(
            &QueryRequest {
                target,
                issued_at: req.arrive,
            },
            now,
        )?;
        self.records.push(MetricsRecord {
            seq: req.seq,
            kind: RecordKind::Query,
            arrive_t: req.arrive,
            start_t: now,
            done_t: resp.done_at,
            latency: resp.latency,
            staleness: Some(resp.staleness),
            touched_nodes: resp.touched_nodes,
            m_at_time: m,
        });
        self.idle_workers -= 1;
        self.push(resp.done_at, EventTag::QueryDone);
        Ok(())
    }

    fn arrival(&mut self, i: usize, now: f64) -> Result<()> {
        let req = &self.requests[i];
        let kind = if req.is_query() {
            RequestKind::Query
        } else {
            RequestKind::Update
        };
        if let Some(auto) = &mut self.auto {
            auto.tracker
                .track(kind, now, self.server.graph().avg_connectivity());
        }
        match &req.body {
            RequestBody::Update(ev) => {
                let pending = self.server.admit_update(ev)?;
                self.writer_queue.push_back((i, pending));
                if !self.writer_busy {
                    self.start_writer(now)?;
                }
            }
            RequestBody::Query(_) => {
                self.query_queue.push_back(i);
                if self.idle_workers > 0 {
                    self.start_query(now)?;
                }
            }
        }
        Ok(())
    }
}

/// Runs `cfg`'s workload against a fresh server built from `prep`.
pub fn simulate(cfg: &RunConfig, prep: &mut Prepared) -> Result<RunOutput> {
    cfg.validate()?;
    let depth = prep.model.depth();
    let c_now = prep.graph.avg_connectivity();
    let (serving, auto) = match &cfg.serving {
        ServingSpec::Auto {
            update_strategy,
            profile,
            retune,
            half_life,
            ..
        } => {
            let unit = match cfg.clock {
                CostClock::Logical { .. } => CostUnit::Touched,
                CostClock::Wall => CostUnit::Seconds,
            };
            let cm = prep
                .cost_model(*update_strategy, unit, profile.as_ref(), cfg.graph.seed)?
                .clone();
            let tracker =
                RateTracker::new(*half_life)?.with_rates(cfg.workload.rps_q, cfg.workload.rps_u);
            let ws = WorkloadStats {
                c_now,
                ..tracker.stats()
            };
            let m = choose_m(&cm, &ws);
            info!("auto: initial M = {m}");
            (
                ServingConfig::collaborative(m, *update_strategy),
                Some(Auto {
                    cm,
                    tracker,
                    retuner: Retuner::new(*retune),
                }),
            )
        }
        spec => (spec.fixed(depth).expect("fixed serving spec"), None),
    };
    let requests = generate_workload(&prep.graph, &cfg.workload)?;
    let server = Server::new(prep.graph.clone(), prep.model.clone(), serving, cfg.clock)?;
    let initial_m = server.m();
    let mut lp = Loop {
        server,
        requests: &requests,
        heap: BinaryHeap::with_capacity(requests.len() + 8),
        order: 0,
        writer_busy: false,
        writer_queue: VecDeque::new(),
        in_flight: None,
        idle_workers: cfg.query_workers,
        query_queue: VecDeque::new(),
        records: Vec::with_capacity(requests.len()),
        updates: Vec::new(),
        timeline: vec![MChange {
            t: 0.0,
            m: initial_m,
        }],
        auto,
    };
    for (i, r) in requests.iter().enumerate() {
        lp.push(r.arrive, EventTag::Arrival(i));
    }
    while let Some(ev) = lp.heap.pop() {
        match ev.tag {
            EventTag::Arrival(i) => lp.arrival(i, ev.time)?,
            EventTag::WriterFree => {
                if let Some(p) = lp.in_flight.take() {
                    lp.server.complete_update(&p);
                }
                lp.start_writer(ev.time)?
            }
            EventTag::QueryDone => {
                lp.idle_workers += 1;
                lp.start_query(ev.time)?;
            }
        }
    }
    let mut records = lp.records;
    records.sort_by_key(|r| r.seq);
    let mut summary = Summary::from_records(&records);
    summary.m_timeline = lp.timeline;
    summary.cache_floats = lp.server.cache().cached_floats();
    Ok(RunOutput {
        records,
        updates: lp.updates,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphModel;
    use crate::harness::config::{GraphParams, UpdateMix, WorkloadSpec};
    use crate::model::{Flavor, ModelConfig};

    fn cfg(serving: ServingSpec, rps_q: f64, rps_u: f64) -> RunConfig {
        RunConfig {
            graph: GraphParams {
                n: 2000,
                c: 4,
                model: GraphModel::Regular,
                seed: 3,
                ..Default::default()
            },
            model: ModelConfig {
                flavor: Flavor::Sage,
                num_layers: 2,
                dims: vec![4, 4, 4],
                agg: None,
                seed: 1,
            },
            serving,
            workload: WorkloadSpec {
                rps_q,
                rps_u,
                duration: 2.0,
                update_mix: UpdateMix {
                    feature_update: 0.6,
                    add_edge: 0.2,
                    remove_edge: 0.2,
                },
                seed: 9,
                hot_query_fraction: 0.5,
            },
            clock: CostClock::default(),
            query_workers: 1,
            output: None,
            updates_output: None,
        }
    }

    #[test]
    fn conservation_and_ordering() {
        let c = cfg(
            ServingSpec::Collaborative {
                m: 1,
                update_strategy: UpdateStrategy::Aip,
            },
            200.0,
            200.0,
        );
        let out = run(&c).unwrap();
        let prep = Prepared::new(&c).unwrap();
        assert_eq!(
            out.records.len(),
            generate_workload(&prep.graph, &c.workload).unwrap().len()
        );
        for r in &out.records {
            assert!(r.arrive_t <= r.start_t && r.start_t <= r.done_t);
            assert!((r.latency - (r.done_t - r.arrive_t)).abs() < 1e-12);
            assert_eq!(r.staleness.is_some(), r.kind == RecordKind::Query);
            assert!(r.staleness.unwrap_or(0.0) >= 0.0);
        }
    }

    #[test]
    fn upd_based_without_updates() {
        let out = run(&cfg(ServingSpec::UpdBased, 300.0, 0.0)).unwrap();
        assert!(out
            .records
            .iter()
            .all(|r| r.touched_nodes == 1 && r.staleness == Some(0.0)));
        assert!(out
            .records
            .iter()
            .all(|r| (r.done_t - r.start_t - 1e-5).abs() < 1e-15));
    }

    #[test]
    fn logical_runs_are_byte_identical() {
        let c = cfg(ServingSpec::auto(UpdateStrategy::Aip), 300.0, 300.0);
        let mut prep = Prepared::new(&c).unwrap();
        prep.insert_cost_model(
            profile(
                &ProfileParams {
                    n: 2000,
                    c_samples: vec![2, 3, 4, 6],
                    reps: 10,
                    ..Default::default()
                },
                &prep.model,
            )
            .unwrap(),
        );
        let a = simulate(&c, &mut prep).unwrap().csv_bytes().unwrap();
        let b = simulate(&c, &mut prep).unwrap().csv_bytes().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn splits_shift_work_between_handlers() {
        let mut q = Vec::new();
        let mut u = Vec::new();
        for m in 0..=2 {
            let out = run(&cfg(
                ServingSpec::Collaborative {
                    m,
                    update_strategy: UpdateStrategy::Aip,
                },
                100.0,
                100.0,
            ))
            .unwrap();
            q.push(out.summary.touched_query_mean);
            u.push(out.summary.touched_update_mean);
        }
        assert!(q[0] > q[1] && q[1] > q[2], "{q:?}");
        assert!(u[1] < u[2], "{u:?}");
    }
}
