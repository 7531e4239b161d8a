//! Cost profiling and selection of the split point `M`.
//!
//! Per-request query and update costs are modelled as polynomials in the
//! average connectivity `c`: degree `L - M` for queries and `M + 1` for updates
//! (a constant at `M = 0`). The chosen `M` minimizes
//! `rps_q * t_q(M) + rps_u * t_u(M)`.

use std::fs;
use std::path::Path;

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aip::UpdateStrategy;
use crate::error::{Error, Result};
use crate::graph::{
    generate_synthetic, perturb_feature, EventKind, GraphEvent, GraphModel, NodeId,
};
use crate::model::ModelSpec;
use crate::serving::{CostClock, QueryRequest, Server, ServingConfig};

/// Polynomial with coefficients in ascending monomial order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    /// `coef * x^degree`.
    pub fn monomial(degree: usize, coef: f64) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = coef;
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Least-squares fit of a degree-`degree` polynomial.
///
/// Returns the polynomial and its sum of squared residuals.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<(Polynomial, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(Error::InsufficientSamples {
            needed: degree + 1,
            got: distinct.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("non-finite sample".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let scale = xs.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let k = degree + 1;
    let mut ata = vec![0.0; k * k];
    let mut aty = vec![0.0; k];
    let mut row = vec![0.0; k];
    for (&x, &y) in xs.iter().zip(ys) {
        let z = (x - mean) / scale;
        let mut p = 1.0;
        for r in row.iter_mut() {
            *r = p;
            p *= z;
        }
        for i in 0..k {
            aty[i] += row[i] * y;
            for j in 0..k {
                ata[i * k + j] += row[i] * row[j];
            }
        }
    }
    let centered = solve(&mut ata, &mut aty, k)?;

    // Expand sum_i a_i ((x - mean) / scale)^i into raw monomials.
    let mut coeffs = vec![0.0; k];
    for (i, a) in centered.iter().enumerate() {
        let s = a / scale.powi(i as i32);
        let mut binom = 1.0;
        for j in 0..=i {
            // binom = C(i, j)
            coeffs[j] += s * binom * (-mean).powi((i - j) as i32);
            binom = binom * (i - j) as f64 / (j + 1) as f64;
        }
    }
    let poly = Polynomial { coeffs };
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (poly.eval(x) - y).powi(2))
        .sum();
    Ok((poly, residual))
}

/// Gaussian elimination with partial pivoting on a `k x k` row-major system.
fn solve(a: &mut [f64], b: &mut [f64], k: usize) -> Result<Vec<f64>> {
    let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = norm * 1e-13;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))
            .unwrap();
        if a[pivot * k + col].abs() <= tol {
            return Err(Error::DegenerateFit);
        }
        if pivot != col {
            for j in 0..k {
                a.swap(pivot * k + j, col * k + j);
            }
            b.swap(pivot, col);
        }
        for i in col + 1..k {
            let f = a[i * k + col] / a[col * k + col];
            for j in col..k {
                a[i * k + j] -= f * a[col * k + j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let tail: f64 = (i + 1..k).map(|j| a[i * k + j] * x[j]).sum();
        x[i] = (b[i] - tail) / a[i * k + i];
    }
    Ok(x)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostUnit {
    /// Touched-node counts.
    Touched,
    /// Wall-clock seconds.
    Seconds,
}

/// Fitted costs for one split point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCost {
    #[serde(rename = "M")]
    pub m: usize,
    pub coeffs_q: Polynomial,
    pub coeffs_u: Polynomial,
    pub fit_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    #[serde(rename = "L")]
    pub depth: usize,
    pub unit: CostUnit,
    pub strategy: UpdateStrategy,
    /// Profiled connectivity range.
    pub c_min: f64,
    pub c_max: f64,
    pub splits: Vec<SplitCost>,
}

impl CostModel {
    /// Builds a model from explicit curves, one per `M` in `0..=L`.
    pub fn from_curves(depth: usize, curves: Vec<(Polynomial, Polynomial)>) -> Result<Self> {
        if curves.len() != depth + 1 {
            return Err(Error::InvalidParams(format!(
                "need {} curves, got {}",
                depth + 1,
                curves.len()
            )));
        }
        Ok(CostModel {
            depth,
            unit: CostUnit::Touched,
            strategy: UpdateStrategy::Aip,
            c_min: 0.0,
            c_max: f64::INFINITY,
            splits: curves
                .into_iter()
                .enumerate()
                .map(|(m, (q, u))| SplitCost {
                    m,
                    coeffs_q: q,
                    coeffs_u: u,
                    fit_residual: 0.0,
                })
                .collect(),
        })
    }

    fn split(&self, m: usize) -> &SplitCost {
        &self.splits[m]
    }

    pub fn t_q(&self, m: usize, c: f64) -> f64 {
        self.split(m).coeffs_q.eval(c).max(0.0)
    }

    pub fn t_u(&self, m: usize, c: f64) -> f64 {
        self.split(m).coeffs_u.eval(c).max(0.0)
    }

    /// Predicted work per unit time at split `m`.
    pub fn objective(&self, m: usize, ws: &WorkloadStats) -> f64 {
        ws.rps_q * self.t_q(m, ws.c_now) + ws.rps_u * self.t_u(m, ws.c_now)
    }

    pub fn validate(&self) -> Result<()> {
        if self.splits.len() != self.depth + 1 {
            return Err(Error::Config(format!(
                "cost model for L={} has {} splits",
                self.depth,
                self.splits.len()
            )));
        }
        for (m, s) in self.splits.iter().enumerate() {
            if s.m != m {
                return Err(Error::Config(format!("split {m} is labelled M={}", s.m)));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, toml::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cm: CostModel = toml::from_str(&fs::read_to_string(path)?)?;
        cm.validate()?;
        Ok(cm)
    }
}

/// Request rates and current connectivity.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadStats {
    pub rps_q: f64,
    pub rps_u: f64,
    pub c_now: f64,
    pub half_life: f64,
}

impl WorkloadStats {
    pub fn new(rps_q: f64, rps_u: f64, c_now: f64) -> Self {
        WorkloadStats {
            rps_q,
            rps_u,
            c_now,
            half_life: DEFAULT_HALF_LIFE,
        }
    }
}

/// Default EWMA half-life, in seconds.
pub const DEFAULT_HALF_LIFE: f64 = 10.0;

/// Split point with the lowest predicted objective; ties go to the smaller `M`.
pub fn choose_m(cm: &CostModel, ws: &WorkloadStats) -> usize {
    let mut best = 0;
    let mut best_obj = cm.objective(0, ws);
    for m in 1..=cm.depth {
        let obj = cm.objective(m, ws);
        if obj < best_obj {
            best = m;
            best_obj = obj;
        }
    }
    if ws.c_now < cm.c_min || ws.c_now > cm.c_max {
        warn!(
            "connectivity {:.2} outside profiled range [{}, {}]",
            ws.c_now, cm.c_min, cm.c_max
        );
    }
    best
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Query,
    Update,
}

/// Exponentially weighted request-rate estimator.
///
/// Each arrival adds `1 / tau` to its rate and all rates decay by
/// `exp(-dt / tau)`, with `tau = half_life / ln 2`. Under a steady Poisson
/// stream of rate `r` the estimate converges to `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTracker {
    stats: WorkloadStats,
    last_t: Option<f64>,
}

impl RateTracker {
    pub fn new(half_life: f64) -> Result<Self> {
        if !(half_life > 0.0 && half_life.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "half-life must be positive, got {half_life}"
            )));
        }
        Ok(RateTracker {
            stats: WorkloadStats {
                rps_q: 0.0,
                rps_u: 0.0,
                c_now: 0.0,
                half_life,
            },
            last_t: None,
        })
    }

    /// Seeds the estimate, e.g. with the configured workload rates.
    pub fn with_rates(mut self, rps_q: f64, rps_u: f64) -> Self {
        self.stats.rps_q = rps_q.max(0.0);
        self.stats.rps_u = rps_u.max(0.0);
        self
    }

    fn tau(&self) -> f64 {
        self.stats.half_life / std::f64::consts::LN_2
    }

    fn decay_to(&mut self, t_now: f64) {
        if let Some(last) = self.last_t {
            let dt = (t_now - last).max(0.0);
            let f = (-dt / self.tau()).exp();
            self.stats.rps_q *= f;
            self.stats.rps_u *= f;
        }
        self.last_t = Some(self.last_t.map_or(t_now, |l| l.max(t_now)));
    }

    pub fn track(&mut self, kind: RequestKind, t_now: f64, c_now: f64) -> WorkloadStats {
        self.decay_to(t_now);
        let bump = 1.0 / self.tau();
        match kind {
            RequestKind::Query => self.stats.rps_q += bump,
            RequestKind::Update => self.stats.rps_u += bump,
        }
        self.stats.c_now = c_now;
        self.stats
    }

    pub fn stats(&self) -> WorkloadStats {
        self.stats
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetunePolicy {
    /// Minimum relative objective improvement.
    pub hysteresis: f64,
    /// Minimum time between two accepted proposals, in seconds.
    pub cooldown: f64,
}

impl Default for RetunePolicy {
    fn default() -> Self {
        RetunePolicy {
            hysteresis: 0.1,
            cooldown: 5.0,
        }
    }
}

/// Rate-limited `M` proposals.
#[derive(Clone, Debug, PartialEq)]
pub struct Retuner {
    pub policy: RetunePolicy,
    last_change: Option<f64>,
}

impl Retuner {
    pub fn new(policy: RetunePolicy) -> Self {
        Retuner {
            policy,
            last_change: None,
        }
    }

    pub fn maybe_retune(
        &mut self,
        ws: &WorkloadStats,
        cm: &CostModel,
        current_m: usize,
        t_now: f64,
    ) -> Option<usize> {
        if let Some(last) = self.last_change {
            if t_now - last < self.policy.cooldown {
                return None;
            }
        }
        let best = choose_m(cm, ws);
        if best == current_m {
            return None;
        }
        let cur = cm.objective(current_m, ws);
        let new = cm.objective(best, ws);
        if new < cur * (1.0 - self.policy.hysteresis) {
            debug!("retune M {current_m} -> {best}: objective {cur:.4} -> {new:.4}");
            self.last_change = Some(t_now);
            Some(best)
        } else {
            None
        }
    }
}

/// Synthetic graphs and request counts used for profiling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileParams {
    pub n: usize,
    pub graph_model: GraphModel,
    pub c_samples: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub unit: CostUnit,
    pub strategy: UpdateStrategy,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            n: 20_000,
            graph_model: GraphModel::Regular,
            c_samples: vec![4, 8, 16, 32],
            reps: 50,
            seed: 0,
            unit: CostUnit::Touched,
            strategy: UpdateStrategy::Aip,
        }
    }
}

/// Mean per-request costs at one `(c, M)` point.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ProfileSample {
    pub c: f64,
    pub m: usize,
    pub t_q: f64,
    pub t_u: f64,
}

/// Measures mean query and update cost for every `M` and `c`.
pub fn measure(params: &ProfileParams, model: &ModelSpec) -> Result<Vec<ProfileSample>> {
    if params.reps == 0 {
        return Err(Error::InvalidParams("reps must be positive".into()));
    }
    let clock = match params.unit {
        CostUnit::Touched => CostClock::Logical { unit_cost: 1.0 },
        CostUnit::Seconds => CostClock::Wall,
    };
    let depth = model.depth();
    let mut out = Vec::new();
    for &c in &params.c_samples {
        let g = generate_synthetic(
            params.n,
            c,
            params.graph_model,
            model.input_dim(),
            params.seed ^ (c as u64).wrapping_mul(0x9e37_79b9),
        )?;
        for m in 0..=depth {
            let cfg = ServingConfig::collaborative(m, params.strategy);
            let mut server = Server::new(g.clone(), model.clone(), cfg, clock)?;
            let mut rng =
                ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(c as u64 * 31 + m as u64));
            let n = server.graph().capacity() as u32;
            let mut t_u = 0.0;
            for i in 0..params.reps {
                let v = NodeId(rng.random_range(0..n));
                let feature = perturb_feature(server.graph().feature(v), 0.1, &mut rng);
                let ev = GraphEvent {
                    seq: i as u64 + 1,
                    time: 0.0,
                    kind: EventKind::UpdateFeature { node: v, feature },
                };
                t_u += server.handle_update(&ev)?.service_time;
            }
            let mut t_q = 0.0;
            for _ in 0..params.reps {
                let v = NodeId(rng.random_range(0..n));
                t_q += server
                    .handle_query(
                        &QueryRequest {
                            target: v,
                            issued_at: 0.0,
                        },
                        0.0,
                    )?
                    .latency;
            }
            let reps = params.reps as f64;
            out.push(ProfileSample {
                c: c as f64,
                m,
                t_q: t_q / reps,
                t_u: t_u / reps,
            });
        }
    }
    Ok(out)
}

/// Fits the cost curves for every `M` from measured samples.
pub fn fit_cost_model(
    depth: usize,
    samples: &[ProfileSample],
    unit: CostUnit,
    strategy: UpdateStrategy,
) -> Result<CostModel> {
    let mut splits = Vec::with_capacity(depth + 1);
    for m in 0..=depth {
        let pts: Vec<&ProfileSample> = samples.iter().filter(|s| s.m == m).collect();
        let cs: Vec<f64> = pts.iter().map(|s| s.c).collect();
        let q: Vec<f64> = pts.iter().map(|s| s.t_q).collect();
        let u: Vec<f64> = pts.iter().map(|s| s.t_u).collect();
        let deg_u = if m == 0 { 0 } else { m + 1 };
        let (coeffs_q, rq) = fit_polynomial(&cs, &q, depth - m)?;
        let (coeffs_u, ru) = fit_polynomial(&cs, &u, deg_u)?;
        splits.push(SplitCost {
            m,
            coeffs_q,
            coeffs_u,
            fit_residual: rq + ru,
        });
    }
    let c_min = samples.iter().map(|s| s.c).fold(f64::INFINITY, f64::min);
    let c_max = samples
        .iter()
        .map(|s| s.c)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CostModel {
        depth,
        unit,
        strategy,
        c_min,
        c_max,
        splits,
    })
}

/// Measures and fits in one step. Deterministic in touched-node units.
pub fn profile(params: &ProfileParams, model: &ModelSpec) -> Result<CostModel> {
    let mut distinct = params.c_samples.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let needed = model.depth() + 2;
    if distinct.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: distinct.len(),
        });
    }
    let samples = measure(params, model)?;
    fit_cost_model(model.depth(), &samples, params.unit, params.strategy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_weights, Flavor};
    use rand_distr::{Distribution, Normal};

    fn power_table(depth: usize) -> CostModel {
        let curves = (0..=depth)
            .map(|m| {
                (
                    Polynomial::monomial(depth - m, 1.0),
                    Polynomial::monomial(m, 1.0),
                )
            })
            .collect();
        CostModel::from_curves(depth, curves).unwrap()
    }

    #[test]
    fn example_objectives_pick_middle() {
        let cm = power_table(2);
        let ws = WorkloadStats::new(1.0, 1.0, 10.0);
        let objs: Vec<f64> = (0..=2).map(|m| cm.objective(m, &ws)).collect();
        assert_eq!(objs, vec![101.0, 20.0, 101.0]);
        assert_eq!(choose_m(&cm, &ws), 1);
    }

    #[test]
    fn zero_rate_limits() {
        let cm = power_table(2);
        assert_eq!(choose_m(&cm, &WorkloadStats::new(1.0, 0.0, 10.0)), 2);
        assert_eq!(choose_m(&cm, &WorkloadStats::new(0.0, 1.0, 10.0)), 0);
    }

    #[test]
    fn ties_go_to_smaller_m() {
        let cm = power_table(2);
        assert_eq!(choose_m(&cm, &WorkloadStats::new(0.0, 0.0, 10.0)), 0);
    }

    #[test]
    fn noiseless_quadratic_recovered() {
        let xs = [4.0, 8.0, 16.0, 32.0];
        let ys: Vec<f64> = xs.iter().map(|c| 3.0 * c * c).collect();
        let (p, res) = fit_polynomial(&xs, &ys, 2).unwrap();
        assert!((p.coeffs[2] - 3.0).abs() < 1e-6, "{:?}", p);
        assert!(
            p.coeffs[1].abs() < 1e-6 && p.coeffs[0].abs() < 1e-6,
            "{:?}",
            p
        );
        assert!(res < 1e-9);
    }

    #[test]
    fn constant_fit_is_mean() {
        let (p, _) = fit_polynomial(&[1.0, 2.0, 3.0], &[2.0, 4.0, 9.0], 0).unwrap();
        assert_eq!(p.degree(), 0);
        assert!((p.coeffs[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_polynomial(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0], 2),
            Err(Error::InsufficientSamples { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn noisy_fit_predicts_held_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let truth = |c: f64| 2.0 + 0.5 * c + 3.0 * c * c;
        let xs: Vec<f64> = (0..40).map(|i| 4.0 + i as f64 * 0.7).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&c| truth(c) * (1.0 + noise.sample(&mut rng)))
            .collect();
        let (p, _) = fit_polynomial(&xs, &ys, 2).unwrap();
        for c in [5.15, 12.3, 20.05, 28.9] {
            let rel = (p.eval(c) - truth(c)).abs() / truth(c);
            assert!(rel < 0.10, "c={c} rel={rel}");
        }
    }

    #[test]
    fn higher_degree_never_fits_worse() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ys = [1.0, 3.0, 2.0, 5.0, 4.0, 7.0];
        let mut prev = f64::INFINITY;
        for d in 0..=4 {
            let (_, r) = fit_polynomial(&xs, &ys, d).unwrap();
            assert!(r <= prev + 1e-9);
            prev = r;
        }
    }

    #[test]
    fn ewma_converges_to_rate() {
        let mut t = RateTracker::new(2.0).unwrap();
        for i in 0..2000 {
            t.track(RequestKind::Query, i as f64 * 0.01, 4.0);
        }
        let s = t.stats();
        assert!((s.rps_q - 100.0).abs() < 5.0, "{}", s.rps_q);
        assert_eq!(s.rps_u, 0.0);
        assert_eq!(s.c_now, 4.0);
        assert!(RateTracker::new(0.0).is_err());
    }

    #[test]
    fn retune_hysteresis_and_cooldown() {
        let cm = power_table(2);
        let mut r = Retuner::new(RetunePolicy {
            hysteresis: 0.1,
            cooldown: 5.0,
        });
        let ws = WorkloadStats::new(1.0, 1.0, 10.0);
        assert_eq!(r.maybe_retune(&ws, &cm, 1, 0.0), None);
        assert_eq!(r.maybe_retune(&ws, &cm, 0, 0.0), Some(1));
        assert_eq!(r.maybe_retune(&ws, &cm, 0, 1.0), None);
        assert_eq!(r.maybe_retune(&ws, &cm, 0, 6.0), Some(1));
        // Objective 101 vs 100: not worth moving.
        let near = CostModel::from_curves(
            1,
            vec![
                (Polynomial::new(vec![101.0]), Polynomial::new(vec![0.0])),
                (Polynomial::new(vec![100.0]), Polynomial::new(vec![0.0])),
            ],
        )
        .unwrap();
        let mut r = Retuner::new(RetunePolicy::default());
        assert_eq!(r.maybe_retune(&ws, &near, 0, 0.0), None);
    }

    #[test]
    fn toml_round_trip() {
        let cm = power_table(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cost.toml");
        cm.save(&path).unwrap();
        assert_eq!(CostModel::load(&path).unwrap(), cm);
    }

    #[test]
    fn profile_in_touched_units() {
        let model = init_weights(Flavor::Sage, &[4, 4, 4], None, 1).unwrap();
        let params = ProfileParams {
            n: 3000,
            c_samples: vec![2, 3, 4, 6],
            reps: 10,
            ..Default::default()
        };
        let cm = profile(&params, &model).unwrap();
        assert_eq!(cm.splits.len(), 3);
        assert_eq!(cm.splits[0].coeffs_u.degree(), 0);
        assert_eq!(cm.splits[2].coeffs_u.degree(), 3);
        assert_eq!(cm.splits[0].coeffs_q.degree(), 2);
        assert!((cm.t_u(0, 4.0) - 1.0).abs() < 1e-9);
        assert!((cm.t_q(2, 4.0) - 1.0).abs() < 1e-9);
        assert!(cm.t_q(0, 6.0) > cm.t_q(1, 6.0));
        let again = profile(&params, &model).unwrap();
        assert_eq!(cm, again);
        let short = ProfileParams {
            c_samples: vec![2, 3, 3],
            ..params
        };
        assert!(matches!(
            profile(&short, &model),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
