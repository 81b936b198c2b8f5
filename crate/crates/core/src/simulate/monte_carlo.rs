use serde::Serialize;

use super::{TrialEngine, TrialOutcome};
use crate::error::{input, Result};
use crate::rng::CounterRng;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// Trials summed sequentially before blocks are combined. Fixed, so sums do
/// not depend on how blocks are spread over workers.
const BLOCK: u64 = 4096;

/// Wilson score interval at 99% for `k` successes out of `n`.
pub fn wilson(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z99 * Z99;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z99 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, Default)]
struct Acc {
    n: u64,
    matched: Vec<u64>,
    r0: Vec<u64>,
    r1: Vec<u64>,
    // conditional estimator: sum and sum of squares, overall and on R0 / R1
    g: [Vec<f64>; 6],
    rev: [f64; 4],
    max_probes: Vec<u32>,
}

impl Acc {
    fn new(m: usize, nv: usize) -> Self {
        Self {
            n: 0,
            matched: vec![0; m],
            r0: vec![0; m],
            r1: vec![0; m],
            g: std::array::from_fn(|_| vec![0.0; m]),
            rev: [0.0; 4],
            max_probes: vec![0; nv],
        }
    }

    fn add(&mut self, o: &TrialOutcome) {
        self.n += 1;
        for e in 0..self.matched.len() {
            let q = o.q_count[e];
            if o.matched[e] {
                self.matched[e] += 1;
                self.r0[e] += (q == 0) as u64;
                self.r1[e] += (q == 1) as u64;
            }
            let a = o.accept_prob[e];
            if a != 0.0 {
                self.g[0][e] += a;
                self.g[1][e] += a * a;
                if q == 0 {
                    self.g[2][e] += a;
                    self.g[3][e] += a * a;
                } else if q == 1 {
                    self.g[4][e] += a;
                    self.g[5][e] += a * a;
                }
            }
        }
        self.rev[0] += o.revenue;
        self.rev[1] += o.revenue * o.revenue;
        self.rev[2] += o.revenue_cond;
        self.rev[3] += o.revenue_cond * o.revenue_cond;
        for (m, &p) in self.max_probes.iter_mut().zip(&o.probes_used) {
            *m = (*m).max(p);
        }
    }

    fn merge(&mut self, other: &Acc) {
        self.n += other.n;
        for e in 0..self.matched.len() {
            self.matched[e] += other.matched[e];
            self.r0[e] += other.r0[e];
            self.r1[e] += other.r1[e];
        }
        for (a, b) in self.g.iter_mut().zip(&other.g) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.rev.iter_mut().zip(&other.rev) {
            *a += b;
        }
        for (m, &p) in self.max_probes.iter_mut().zip(&other.max_probes) {
            *m = (*m).max(p);
        }
    }
}

fn run_block<E: TrialEngine + ?Sized>(engine: &E, root: &CounterRng, lo: u64, hi: u64) -> Acc {
    let mut acc = Acc::new(engine.num_edges(), engine.num_vertices());
    let mut out = TrialOutcome::default();
    for t in lo..hi {
        engine.run(&root.trial(t), &mut out);
        acc.add(&out);
    }
    acc
}

fn run_blocks<E: TrialEngine + ?Sized>(engine: &E, root: &CounterRng, trials: u64, workers: usize) -> Result<Vec<Acc>> {
    let blocks = trials.div_ceil(BLOCK);
    let bounds = move |b: u64| (b * BLOCK, ((b + 1) * BLOCK).min(trials));
    #[cfg(feature = "parallel")]
    if workers != 1 && blocks > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| crate::Error::Internal(format!("thread pool: {e}")))?;
        return Ok(pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let (lo, hi) = bounds(b);
                    run_block(engine, root, lo, hi)
                })
                .collect()
        }));
    }
    let _ = workers;
    Ok((0..blocks)
        .map(|b| {
            let (lo, hi) = bounds(b);
            run_block(engine, root, lo, hi)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeReport {
    pub edge_id: u64,
    pub x_e: f64,
    pub freq: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub freq_r0: f64,
    pub freq_r1: f64,
    /// `freq / x_e`, 0 when `x_e = 0`.
    pub ratio: f64,
    pub r0_ci: (f64, f64),
    pub r1_ci: (f64, f64),
    /// Conditional estimate of `Pr[matched] / x_e` and its 99% half-width.
    pub cond_ratio: f64,
    pub cond_ratio_half: f64,
    /// Conditional estimates of `Pr[matched and R0]`, `Pr[matched and R1]` with 99% half-widths.
    pub cond_r0: f64,
    pub cond_r0_half: f64,
    pub cond_r1: f64,
    pub cond_r1_half: f64,
}

impl EdgeReport {
    /// Half-width of the Wilson interval on the frequency, in ratio units.
    pub fn ratio_half(&self) -> f64 {
        if self.x_e > 0.0 {
            0.5 * (self.ci_hi - self.ci_lo) / self.x_e
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub edges: Vec<EdgeReport>,
    /// Smallest `freq / x_e` over edges with `x_e > 0`.
    pub min_ratio: f64,
    pub min_ratio_edge: Option<u64>,
    /// Same, from the conditional estimator.
    pub min_cond_ratio: f64,
    pub revenue_mean: f64,
    pub revenue_ci: (f64, f64),
    pub revenue_cond_mean: f64,
    pub revenue_cond_half: f64,
    /// Largest number of probes seen at each vertex over all trials.
    pub max_probes: Vec<u32>,
}

/// Mean and 99% normal half-width from a sum and sum of squares.
fn mean_half(sum: f64, sumsq: f64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let mean = sum / n;
    let var = if n > 1.0 {
        ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, Z99 * (var / n).sqrt())
}

/// Runs `trials` trials of `engine`; trial `t` uses stream `t` of `seed`.
/// `workers = 0` uses every available core, 1 runs on the calling thread. The
/// report is identical for every worker count.
pub fn monte_carlo<E: TrialEngine + ?Sized>(engine: &E, trials: u64, seed: u64, workers: usize) -> Result<SimulationReport> {
    if trials == 0 {
        return input("trials must be at least 1");
    }
    let root = CounterRng::new(seed);
    let mut acc = Acc::new(engine.num_edges(), engine.num_vertices());
    for b in run_blocks(engine, &root, trials, workers)? {
        acc.merge(&b);
    }
    let n = acc.n;
    let nf = n as f64;
    let x = engine.x();
    let mut edges = Vec::with_capacity(engine.num_edges());
    for e in 0..engine.num_edges() {
        let (ci_lo, ci_hi) = wilson(acc.matched[e], n);
        let freq = acc.matched[e] as f64 / nf;
        let (g, gh) = mean_half(acc.g[0][e], acc.g[1][e], n);
        let (g0, g0h) = mean_half(acc.g[2][e], acc.g[3][e], n);
        let (g1, g1h) = mean_half(acc.g[4][e], acc.g[5][e], n);
        edges.push(EdgeReport {
            edge_id: engine.edge_ids()[e],
            x_e: x[e],
            freq,
            ci_lo,
            ci_hi,
            freq_r0: acc.r0[e] as f64 / nf,
            freq_r1: acc.r1[e] as f64 / nf,
            ratio: if x[e] > 0.0 { freq / x[e] } else { 0.0 },
            r0_ci: wilson(acc.r0[e], n),
            r1_ci: wilson(acc.r1[e], n),
            cond_ratio: g,
            cond_ratio_half: gh,
            cond_r0: x[e] * g0,
            cond_r0_half: x[e] * g0h,
            cond_r1: x[e] * g1,
            cond_r1_half: x[e] * g1h,
        });
    }
    let mut min_ratio = f64::INFINITY;
    let mut min_ratio_edge = None;
    let mut min_cond_ratio = f64::INFINITY;
    for r in edges.iter().filter(|r| r.x_e > 0.0) {
        if r.ratio < min_ratio {
            min_ratio = r.ratio;
            min_ratio_edge = Some(r.edge_id);
        }
        min_cond_ratio = min_cond_ratio.min(r.cond_ratio);
    }
    let (revenue_mean, rev_half) = mean_half(acc.rev[0], acc.rev[1], n);
    let (revenue_cond_mean, revenue_cond_half) = mean_half(acc.rev[2], acc.rev[3], n);
    Ok(SimulationReport {
        trials: n,
        seed,
        edges,
        min_ratio,
        min_ratio_edge,
        min_cond_ratio,
        revenue_mean,
        revenue_ci: (revenue_mean - rev_half, revenue_mean + rev_half),
        revenue_cond_mean,
        revenue_cond_half,
        max_probes: acc.max_probes,
    })
}
