//! Learned strategy selection for core queries. The three 2D indexes answer
//! the same question at different costs depending on (alpha, beta, tau); a
//! small classifier, trained on wall-timed sample queries, picks which one
//! to run. Routing only affects speed: every strategy returns the same core.
//!
//! Classes are 1 = AB ladders, 2 = the (beta, tau) table, 3 = the
//! (alpha, tau) table, matching the order of the timing columns.

pub mod nn;

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Core};
use crate::index::ser::{w_f64, w_u16, w_u32, Reader};
use crate::index::twod::{build_2d_index, query_via_2d, TwoDIndex, TwoDKind};
use crate::peel::{max_strength_level, PeelCtx, PeelOrder, PeelState};
use nn::{loss_and_grad, Net};
pub use nn::{Hyperparams, Optimizer};

const ROUTER_MAGIC: &[u8; 4] = b"BCRT";
const ROUTER_VERSION: u16 = 1;
const ACTIVATION_SIGMOID_SOFTMAX: u8 = 0;

/// The three strategy indexes a router dispatches between.
pub struct Indexes2D {
    pub ab: TwoDIndex,
    pub bt: TwoDIndex,
    pub at: TwoDIndex,
}

impl Indexes2D {
    pub fn build(g: &BipartiteGraph) -> Self {
        Self {
            ab: build_2d_index(g, TwoDKind::Ab),
            bt: build_2d_index(g, TwoDKind::Bt),
            at: build_2d_index(g, TwoDKind::At),
        }
    }

    fn by_class(&self, class: u8) -> &TwoDIndex {
        match class {
            1 => &self.ab,
            2 => &self.bt,
            3 => &self.at,
            _ => unreachable!("class out of range"),
        }
    }
}

/// One timed sample: the parameters, the three measured strategy times in
/// seconds, and the class of the fastest one.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledQuery {
    pub alpha: u32,
    pub beta: u32,
    pub tau: u32,
    pub times: [f64; 3],
    pub label: u8,
}

impl LabeledQuery {
    pub fn new(alpha: u32, beta: u32, tau: u32, times: [f64; 3]) -> Self {
        let mut label = 1u8;
        for c in 2..=3u8 {
            if times[c as usize - 1] < times[label as usize - 1] {
                label = c;
            }
        }
        Self {
            alpha,
            beta,
            tau,
            times,
            label,
        }
    }
}

/// The sampleable parameter region: alpha up to the largest nonempty
/// strength-1 core, beta up to the per-alpha maximum, tau capped globally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpace {
    pub alpha_max: u32,
    /// beta_max[a-1]: largest beta with a nonempty (a, beta) strength-1 core.
    pub beta_max: Vec<u32>,
    pub tau_cap: u32,
}

impl ParamSpace {
    pub fn of_graph(g: &BipartiteGraph) -> Self {
        let tau_cap = max_strength_level(g);
        if tau_cap == 0 || g.edge_count() == 0 {
            return Self {
                alpha_max: 0,
                beta_max: Vec::new(),
                tau_cap: 0,
            };
        }
        let mut beta_max = Vec::new();
        let mut master = PeelState::new(g, 1);
        let mut alpha = 1u32;
        loop {
            master.peel(
                PeelCtx {
                    g,
                    topo: None,
                    alpha,
                    beta: 1,
                },
                PeelOrder::Deterministic,
                None,
                None,
            );
            if master.is_empty() {
                break;
            }
            let mut bstate = master.clone();
            let mut beta = 1u32;
            loop {
                bstate.peel(
                    PeelCtx {
                        g,
                        topo: None,
                        alpha,
                        beta,
                    },
                    PeelOrder::Deterministic,
                    None,
                    None,
                );
                if bstate.is_empty() {
                    break;
                }
                beta += 1;
            }
            beta_max.push(beta - 1);
            alpha += 1;
        }
        Self {
            alpha_max: alpha - 1,
            beta_max,
            tau_cap,
        }
    }

    pub fn size(&self) -> u64 {
        self.beta_max.iter().map(|&b| b as u64).sum::<u64>() * self.tau_cap as u64
    }

    /// Largest number of training samples allowed: 5% of the space, rounded
    /// up so tiny spaces still admit a sample or two.
    pub fn sample_cap(&self) -> u64 {
        (self.size() as f64 * 0.05).ceil() as u64
    }

    /// Per-feature normalization divisors (alpha, beta, tau), floored at 1.
    pub fn norms(&self) -> [f64; 3] {
        [
            self.alpha_max.max(1) as f64,
            self.beta_max.iter().copied().max().unwrap_or(1).max(1) as f64,
            self.tau_cap.max(1) as f64,
        ]
    }

    /// The `i`th triple of the space, `i < size()`: alpha-major, then beta,
    /// then tau, all 1-based.
    pub fn decode(&self, mut i: u64) -> (u32, u32, u32) {
        for (a, &bm) in self.beta_max.iter().enumerate() {
            let cells = bm as u64 * self.tau_cap as u64;
            if i < cells {
                let b = (i / self.tau_cap as u64) as u32 + 1;
                let t = (i % self.tau_cap as u64) as u32 + 1;
                return (a as u32 + 1, b, t);
            }
            i -= cells;
        }
        unreachable!("sample index out of space")
    }
}

fn median3(mut xs: [f64; 3]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[1]
}

/// Draw `n` distinct parameter triples uniformly, time all three strategies
/// on each (median of 3 runs, monotonic clock), and label by the fastest.
pub fn generate_training_set(
    g: &BipartiteGraph,
    idx: &Indexes2D,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledQuery>> {
    let space = ParamSpace::of_graph(g);
    let cap = space.sample_cap();
    if n as u64 > cap {
        return Err(Error::Usage(format!(
            "{n} samples requested but the parameter space has {} triples, allowing at most {cap}",
            space.size()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let i = rng.gen_range(0..space.size());
        if !seen.insert(i) {
            continue;
        }
        let (alpha, beta, tau) = space.decode(i);
        let mut times = [0.0f64; 3];
        for class in 1..=3u8 {
            let mut reps = [0.0f64; 3];
            for r in &mut reps {
                let start = Instant::now();
                let core = query_via_2d(idx.by_class(class), g, alpha, beta, tau);
                *r = start.elapsed().as_secs_f64();
                std::hint::black_box(core);
            }
            times[class as usize - 1] = median3(reps);
        }
        out.push(LabeledQuery::new(alpha, beta, tau, times));
    }
    Ok(out)
}

/// Misrouting cost: the time of the predicted strategy minus the time of the
/// actual best one. Zero when the prediction is right.
pub fn time_sensitive_error(predicted: u8, actual: u8, times: [f64; 3]) -> Result<f64> {
    if !(1..=3).contains(&predicted) || !(1..=3).contains(&actual) {
        return Err(Error::Usage(format!(
            "strategy classes are 1..=3, got predicted {predicted} actual {actual}"
        )));
    }
    Ok(times[predicted as usize - 1] - times[actual as usize - 1])
}

/// A trained classifier plus the feature scaling it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRouter {
    pub norms: [f64; 3],
    net: Net,
}

impl QueryRouter {
    /// A router with randomly initialized weights. Predictions are arbitrary
    /// but valid classes; useful as a stand-in before any training data exists.
    pub fn untrained(norms: [f64; 3], hidden: u32, seed: u64) -> Self {
        Self {
            norms,
            net: Net::init(hidden as usize, seed),
        }
    }

    fn features(&self, alpha: u32, beta: u32, tau: u32) -> [f64; 3] {
        [
            alpha as f64 / self.norms[0],
            beta as f64 / self.norms[1],
            tau as f64 / self.norms[2],
        ]
    }

    /// Class probabilities; non-negative and summing to 1.
    pub fn scores(&self, alpha: u32, beta: u32, tau: u32) -> [f64; 3] {
        self.net.forward(self.features(alpha, beta, tau))
    }

    /// Predicted class in 1..=3; ties go to the lowest class.
    pub fn predict(&self, alpha: u32, beta: u32, tau: u32) -> u8 {
        let p = self.scores(alpha, beta, tau);
        let mut best = 0usize;
        for c in 1..3 {
            if p[c] > p[best] {
                best = c;
            }
        }
        best as u8 + 1
    }

    pub fn hidden(&self) -> u32 {
        self.net.hidden as u32
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(ROUTER_MAGIC);
        w_u16(&mut buf, ROUTER_VERSION);
        w_u32(&mut buf, self.net.hidden as u32);
        buf.push(ACTIVATION_SIGMOID_SOFTMAX);
        for d in self.norms {
            w_f64(&mut buf, d);
        }
        for &t in &self.net.theta {
            w_f64(&mut buf, t);
        }
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let mut r = Reader::new(&bytes);
        if r.bytes(4)? != ROUTER_MAGIC {
            return Err(Error::Corrupt("bad router magic".into()));
        }
        let version = r.u16()?;
        if version != ROUTER_VERSION {
            return Err(Error::IncompatibleIndex(format!(
                "router version {version}, this build reads {ROUTER_VERSION}"
            )));
        }
        let hidden = r.u32()? as usize;
        if hidden == 0 || hidden > 1 << 16 {
            return Err(Error::Corrupt(format!("implausible hidden size {hidden}")));
        }
        let act = r.u8()?;
        if act != ACTIVATION_SIGMOID_SOFTMAX {
            return Err(Error::IncompatibleIndex(format!(
                "unknown activation tag {act}"
            )));
        }
        let mut norms = [0.0; 3];
        for d in &mut norms {
            *d = r.f64()?;
        }
        let count = hidden * nn::IN + hidden + nn::OUT * hidden + nn::OUT;
        let mut theta = Vec::with_capacity(count);
        for _ in 0..count {
            theta.push(r.f64()?);
        }
        r.finish()?;
        Ok(Self {
            norms,
            net: Net::from_theta(hidden, theta),
        })
    }
}

fn batch(data: &[LabeledQuery], norms: [f64; 3]) -> (Vec<[f64; 3]>, Vec<usize>) {
    let xs = data
        .iter()
        .map(|q| {
            [
                q.alpha as f64 / norms[0],
                q.beta as f64 / norms[1],
                q.tau as f64 / norms[2],
            ]
        })
        .collect();
    let ys = data.iter().map(|q| q.label as usize - 1).collect();
    (xs, ys)
}

pub fn train_classifier(
    data: &[LabeledQuery],
    norms: [f64; 3],
    hp: Hyperparams,
    seed: u64,
) -> Result<QueryRouter> {
    if data.is_empty() {
        return Err(Error::Usage("cannot train on an empty training set".into()));
    }
    let (xs, ys) = batch(data, norms);
    let net = nn::train(Net::init(hp.hidden as usize, seed), &xs, &ys, hp.optimizer);
    Ok(QueryRouter { norms, net })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub hp: Hyperparams,
    pub mean_tse: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub rows: Vec<CvRow>,
    pub best: usize,
}

impl CvReport {
    pub fn best_row(&self) -> &CvRow {
        &self.rows[self.best]
    }
}

/// The hyperparameter settings compared by default: hidden sizes crossed
/// with the three optimizers.
pub fn default_grid() -> Vec<Hyperparams> {
    let mut grid = Vec::new();
    for hidden in [10u32, 20, 30, 50] {
        for optimizer in [
            Optimizer::Gd {
                lr: 0.8,
                epochs: 400,
            },
            Optimizer::Momentum {
                lr: 0.3,
                momentum: 0.9,
                epochs: 400,
            },
            Optimizer::Lbfgs { epochs: 120 },
        ] {
            grid.push(Hyperparams { hidden, optimizer });
        }
    }
    grid
}

/// 5-fold cross-validation over the grid: per setting, train on four folds,
/// score misrouting cost and accuracy on the fifth, average over all
/// held-out instances. Returns every row plus the argmin (first on ties).
pub fn cross_validate(
    data: &[LabeledQuery],
    norms: [f64; 3],
    grid: &[Hyperparams],
    seed: u64,
) -> Result<CvReport> {
    if data.len() < 10 {
        return Err(Error::Usage(format!(
            "cross-validation needs at least 10 labeled queries, got {}",
            data.len()
        )));
    }
    if grid.is_empty() {
        return Err(Error::Usage("hyperparameter grid is empty".into()));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let fold_of: Vec<usize> = {
        let mut f = vec![0usize; data.len()];
        for (pos, &i) in order.iter().enumerate() {
            f[i] = pos % 5;
        }
        f
    };
    let mut rows = Vec::with_capacity(grid.len());
    for (s, &hp) in grid.iter().enumerate() {
        let mut err_sum = 0.0;
        let mut correct = 0usize;
        let mut total = 0usize;
        for k in 0..5 {
            let train_part: Vec<LabeledQuery> = data
                .iter()
                .enumerate()
                .filter(|(i, _)| fold_of[*i] != k)
                .map(|(_, q)| q.clone())
                .collect();
            let fold_seed = seed
                .wrapping_add((s as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15))
                .wrapping_add(k as u64);
            let router = train_classifier(&train_part, norms, hp, fold_seed)?;
            for (i, q) in data.iter().enumerate() {
                if fold_of[i] != k {
                    continue;
                }
                let pred = router.predict(q.alpha, q.beta, q.tau);
                err_sum += time_sensitive_error(pred, q.label, q.times)?;
                if pred == q.label {
                    correct += 1;
                }
                total += 1;
            }
        }
        rows.push(CvRow {
            hp,
            mean_tse: err_sum / total as f64,
            accuracy: correct as f64 / total as f64,
        });
    }
    let mut best = 0usize;
    for (i, row) in rows.iter().enumerate() {
        if row.mean_tse < rows[best].mean_tse {
            best = i;
        }
    }
    Ok(CvReport { rows, best })
}

/// Answer a core query through the predicted-fastest strategy. Level 0 goes
/// straight to the AB ladders; no other strategy answers it without work.
pub fn hybrid_query(
    g: &BipartiteGraph,
    idx: &Indexes2D,
    router: &QueryRouter,
    alpha: u32,
    beta: u32,
    tau: u32,
) -> Core {
    assert!(alpha >= 1 && beta >= 1);
    if tau == 0 {
        return query_via_2d(&idx.ab, g, alpha, beta, 0);
    }
    let class = router.predict(alpha, beta, tau);
    query_via_2d(idx.by_class(class), g, alpha, beta, tau)
}

/// CSV export of a training set: `alpha,beta,tau,t1,t2,t3,label`.
pub fn write_training_csv<W: Write>(mut w: W, data: &[LabeledQuery]) -> Result<()> {
    writeln!(w, "alpha,beta,tau,t1,t2,t3,label")?;
    for q in data {
        writeln!(
            w,
            "{},{},{},{:.9},{:.9},{:.9},{}",
            q.alpha, q.beta, q.tau, q.times[0], q.times[1], q.times[2], q.label
        )?;
    }
    Ok(())
}

/// Training loss of a router on a batch, for reporting.
pub fn training_loss(router: &QueryRouter, data: &[LabeledQuery]) -> f64 {
    let (xs, ys) = batch(data, router.norms);
    loss_and_grad(router.net.hidden, &router.net.theta, &xs, &ys).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peel::online_core;
    use crate::synth;

    #[test]
    fn error_matrix_values() {
        let times = [0.53, 0.03, 0.05];
        assert!((time_sensitive_error(2, 2, times).unwrap() - 0.0).abs() < 1e-12);
        assert!((time_sensitive_error(3, 2, times).unwrap() - 0.02).abs() < 1e-12);
        assert!((time_sensitive_error(1, 2, times).unwrap() - 0.50).abs() < 1e-12);
        assert!(matches!(
            time_sensitive_error(0, 2, times),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            time_sensitive_error(1, 4, times),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn label_prefers_lowest_class_on_ties() {
        let q = LabeledQuery::new(1, 1, 1, [0.5, 0.5, 0.5]);
        assert_eq!(q.label, 1);
        let q = LabeledQuery::new(1, 1, 1, [0.9, 0.2, 0.2]);
        assert_eq!(q.label, 2);
    }

    #[test]
    fn demo_graph_param_space() {
        let g = synth::demo_graph();
        let s = ParamSpace::of_graph(&g);
        assert_eq!(s.alpha_max, 3);
        assert_eq!(s.beta_max, vec![3, 3, 2]);
        assert_eq!(s.tau_cap, 2);
        assert_eq!(s.size(), 16);
        assert_eq!(s.norms(), [3.0, 3.0, 2.0]);
        // Every index decodes to a triple inside the bounds, and all are
        // distinct.
        let mut seen = HashSet::new();
        for i in 0..s.size() {
            let (a, b, t) = s.decode(i);
            assert!((1..=3).contains(&a) && b >= 1 && b <= s.beta_max[a as usize - 1]);
            assert!((1..=2).contains(&t));
            assert!(seen.insert((a, b, t)));
        }
    }

    #[test]
    fn sampling_respects_cap_and_seed() {
        let g = synth::complete_bipartite(3, 3);
        let idx = Indexes2D::build(&g);
        // 3x3 space times tau_cap 4 = 36 triples; 5% rounds up to 2.
        let s = ParamSpace::of_graph(&g);
        assert_eq!(s.size(), 36);
        assert_eq!(s.sample_cap(), 2);
        let a = generate_training_set(&g, &idx, 2, 11).unwrap();
        let b = generate_training_set(&g, &idx, 2, 11).unwrap();
        assert_eq!(a.len(), 2);
        let keys = |v: &[LabeledQuery]| {
            v.iter()
                .map(|q| (q.alpha, q.beta, q.tau))
                .collect::<Vec<_>>()
        };
        assert_eq!(keys(&a), keys(&b));
        assert_ne!(keys(&a)[0], keys(&a)[1]);
        assert!(matches!(
            generate_training_set(&g, &idx, 3, 11),
            Err(Error::Usage(_))
        ));
        assert!(generate_training_set(&g, &idx, 0, 11).unwrap().is_empty());
    }

    fn synthetic_threshold_workload(n: usize) -> Vec<LabeledQuery> {
        // Class 1 fast when tau is high, class 2 fast when tau is low;
        // class 3 never wins.
        (0..n)
            .map(|i| {
                let tau = (i % 10) as u32 + 1;
                let times = if tau > 5 {
                    [0.001, 0.010, 0.020]
                } else {
                    [0.010, 0.001, 0.020]
                };
                LabeledQuery::new((i % 3) as u32 + 1, (i % 4) as u32 + 1, tau, times)
            })
            .collect()
    }

    #[test]
    fn trained_router_learns_threshold() {
        let data = synthetic_threshold_workload(120);
        let norms = [3.0, 4.0, 10.0];
        let hp = Hyperparams {
            hidden: 20,
            optimizer: Optimizer::Lbfgs { epochs: 120 },
        };
        let router = train_classifier(&data, norms, hp, 5).unwrap();
        let mut ok = 0;
        for q in &data {
            if router.predict(q.alpha, q.beta, q.tau) == q.label {
                ok += 1;
            }
        }
        assert!(ok as f64 / data.len() as f64 >= 0.99);
        let p = router.scores(2, 2, 8);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cross_validate_contracts() {
        let data = synthetic_threshold_workload(60);
        let norms = [3.0, 4.0, 10.0];
        let lone = vec![Hyperparams {
            hidden: 10,
            optimizer: Optimizer::Lbfgs { epochs: 60 },
        }];
        let report = cross_validate(&data, norms, &lone, 3).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.best, 0);
        assert!(report.best_row().accuracy > 0.9);
        assert!(matches!(
            cross_validate(&data[..5], norms, &lone, 3),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            cross_validate(&data, norms, &[], 3),
            Err(Error::Usage(_))
        ));
        // Determinism.
        let again = cross_validate(&data, norms, &lone, 3).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn hybrid_matches_online_whatever_the_router_says() {
        let g = synth::random_bipartite(12, 11, 50, 77);
        let idx = Indexes2D::build(&g);
        // Deliberately untrained weights: routing must not affect results.
        let router = QueryRouter {
            norms: [1.0, 1.0, 1.0],
            net: Net::init(10, 0),
        };
        for a in 1..=3 {
            for b in 1..=3 {
                for t in 0..=3 {
                    assert_eq!(
                        hybrid_query(&g, &idx, &router, a, b, t),
                        online_core(&g, a, b, t),
                        "a={a} b={b} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn router_file_round_trip() {
        let data = synthetic_threshold_workload(40);
        let hp = Hyperparams {
            hidden: 12,
            optimizer: Optimizer::Lbfgs { epochs: 40 },
        };
        let router = train_classifier(&data, [3.0, 4.0, 10.0], hp, 9).unwrap();
        let dir = std::env::temp_dir().join("bicore-router-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("router.bcrt");
        router.save(&path).unwrap();
        let back = QueryRouter::load(&path).unwrap();
        assert_eq!(back, router);
        for (a, b, t) in [(1, 1, 1), (2, 3, 8), (3, 2, 4)] {
            assert_eq!(back.predict(a, b, t), router.predict(a, b, t));
        }

        let good = std::fs::read(&path).unwrap();
        let mut bad = good.clone();
        bad[0] = b'Z';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(QueryRouter::load(&path), Err(Error::Corrupt(_))));
        let mut bad = good.clone();
        bad[4] = 7;
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(
            QueryRouter::load(&path),
            Err(Error::IncompatibleIndex(_))
        ));
        std::fs::write(&path, &good[..good.len() - 1]).unwrap();
        assert!(matches!(QueryRouter::load(&path), Err(Error::Corrupt(_))));
        std::fs::remove_file(&path).unwrap();
    }
}
