//! Trial engines for the four online algorithms, Monte Carlo aggregation, and
//! exact references for tiny instances.
//!
//! Every engine processes edges in a random order and records, per trial, which
//! edges were matched together with the statistics the bounds talk about:
//! whether an edge was free on arrival, how many realized neighbors preceded
//! it, and the probability it would have been matched given everything except
//! its own coins (`accept_prob`, scaled by `1/x_e`).

mod exact;
mod monte_carlo;

pub use exact::{exact_trivial_oracle, fixed_order_value, greedy_baseline, greedy_order, optimal_policy_dp, GreedyRule, DP_OPTION_LIMIT};
pub use monte_carlo::{monte_carlo, wilson, EdgeReport, SimulationReport, Z99};

use crate::attenuation::{AttenuationSpec, PreparedAttenuation};
use crate::error::{input, Result};
use crate::graph::{check_polytope, edge_stats, Patience, PricingInstance, Side, Topology, POLYTOPE_TOL};
use crate::lp::{FractionalPoint, Objective};
use crate::rng::{Purpose, TrialRng};

/// Per-trial record. Vectors are indexed by edge (or vertex) position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialOutcome {
    pub matched: Vec<bool>,
    /// Edge-arrival schemes: the `x_e` coin. Stochastic: the `p_e` coin. Pricing: acceptance of `pi_e`.
    pub active: Vec<bool>,
    /// Would be matched if free (and, with patience, if both endpoints may still be probed).
    pub realized: Vec<bool>,
    /// Probed (stochastic) or offered a price (pricing).
    pub probed: Vec<bool>,
    /// Free, and with patience left at both endpoints, when the edge was reached.
    pub eligible: Vec<bool>,
    /// Realized neighbors processed before the edge.
    pub q_count: Vec<u32>,
    /// `Pr[e matched | all randomness but e's own coins] / x_e`: the attenuation if eligible, else 0.
    pub accept_prob: Vec<f64>,
    pub revenue: f64,
    /// Expected revenue given everything except each edge's own coins.
    pub revenue_cond: f64,
    pub probes_used: Vec<u32>,
    order: Vec<usize>,
    key: Vec<(f64, f64)>,
}

impl TrialOutcome {
    fn reset(&mut self, edges: usize, vertices: usize) {
        for v in [&mut self.matched, &mut self.active, &mut self.realized, &mut self.probed, &mut self.eligible] {
            v.clear();
            v.resize(edges, false);
        }
        self.q_count.clear();
        self.q_count.resize(edges, 0);
        self.accept_prob.clear();
        self.accept_prob.resize(edges, 0.0);
        self.probes_used.clear();
        self.probes_used.resize(vertices, 0);
        self.revenue = 0.0;
        self.revenue_cond = 0.0;
        self.key.clear();
        self.key.resize(edges, (0.0, 0.0));
    }

    pub fn matched_edges(&self) -> Vec<usize> {
        (0..self.matched.len()).filter(|&e| self.matched[e]).collect()
    }
}

/// A prepared algorithm: immutable, shareable across workers.
pub trait TrialEngine: Sync {
    fn num_edges(&self) -> usize;
    fn num_vertices(&self) -> usize;
    fn edge_ids(&self) -> &[u64];
    /// Marginals `x_e` against which balancedness is measured.
    fn x(&self) -> &[f64];
    fn run(&self, rng: &TrialRng, out: &mut TrialOutcome);

    fn trial(&self, rng: &TrialRng) -> TrialOutcome {
        let mut out = TrialOutcome::default();
        self.run(rng, &mut out);
        out
    }
}

/// Adjacency shared by all engines.
#[derive(Clone, Debug)]
struct Graph {
    endpoints: Vec<(usize, usize)>,
    /// Other edges with the same endpoint pair; counted once in `Q(e)`.
    parallel: Vec<Vec<usize>>,
    ids: Vec<u64>,
    patience: Vec<Patience>,
}

impl Graph {
    fn new(inst: &PricingInstance) -> Result<(Self, Topology)> {
        let topo = Topology::new(inst)?;
        let m = topo.num_edges();
        let endpoints: Vec<_> = (0..m).map(|e| topo.endpoints(e)).collect();
        let norm = |(a, b): (usize, usize)| (a.min(b), a.max(b));
        let parallel = (0..m)
            .map(|e| {
                topo.neighbors(e)
                    .iter()
                    .copied()
                    .filter(|&f| norm(endpoints[f]) == norm(endpoints[e]))
                    .collect()
            })
            .collect();
        Ok((
            Self {
                endpoints,
                parallel,
                ids: inst.edges.iter().map(|e| e.id).collect(),
                patience: inst.vertices.iter().map(|v| v.patience).collect(),
            },
            topo,
        ))
    }

    fn len(&self) -> usize {
        self.endpoints.len()
    }

    /// Sorts `out.order` by `out.key`, ties by edge id.
    fn sort(&self, out: &mut TrialOutcome) {
        out.order.clear();
        out.order.extend(0..self.len());
        let key = &out.key;
        let ids = &self.ids;
        out.order.sort_unstable_by(|&a, &b| {
            key[a]
                .0
                .total_cmp(&key[b].0)
                .then(key[a].1.total_cmp(&key[b].1))
                .then(ids[a].cmp(&ids[b]))
        });
    }

    /// Walks the order. `attempt(e)` is called for eligible edges and decides
    /// whether `e` is probed and whether it is then matched.
    fn sweep(&self, out: &mut TrialOutcome, free: &mut Vec<bool>, realized_at: &mut Vec<u32>, seen: &mut Vec<bool>, use_patience: bool, mut attempt: impl FnMut(usize, &mut TrialOutcome) -> (bool, bool)) {
        let nv = out.probes_used.len();
        free.clear();
        free.resize(nv, true);
        realized_at.clear();
        realized_at.resize(nv, 0);
        seen.clear();
        seen.resize(self.len(), false);
        for i in 0..self.len() {
            let e = out.order[i];
            let (u, v) = self.endpoints[e];
            let dup = self.parallel[e].iter().filter(|&&f| seen[f] && out.realized[f]).count() as u32;
            out.q_count[e] = realized_at[u] + realized_at[v] - dup;
            let patient = !use_patience || (self.patience[u].allows(out.probes_used[u]) && self.patience[v].allows(out.probes_used[v]));
            let eligible = free[u] && free[v] && patient;
            out.eligible[e] = eligible;
            if eligible {
                let (probed, matched) = attempt(e, out);
                if probed {
                    out.probed[e] = true;
                    out.probes_used[u] += 1;
                    out.probes_used[v] += 1;
                }
                if matched {
                    out.matched[e] = true;
                    free[u] = false;
                    free[v] = false;
                }
            }
            if out.realized[e] {
                realized_at[u] += 1;
                realized_at[v] += 1;
            }
            seen[e] = true;
        }
    }
}

thread_local! {
    static SCRATCH: std::cell::RefCell<(Vec<bool>, Vec<u32>, Vec<bool>)> = const { std::cell::RefCell::new((Vec::new(), Vec::new(), Vec::new())) };
}

fn with_scratch<R>(f: impl FnOnce(&mut Vec<bool>, &mut Vec<u32>, &mut Vec<bool>) -> R) -> R {
    SCRATCH.with(|s| {
        let mut s = s.borrow_mut();
        let (a, b, c) = &mut *s;
        f(a, b, c)
    })
}

fn check_x(inst: &PricingInstance, x: &[f64]) -> Result<()> {
    let check = check_polytope(inst, x)?;
    if !check.feasible {
        return input(format!("x is outside the matching polytope: {:?}", check.worst));
    }
    if let Some(v) = x.iter().find(|&&v| v > 1.0 + POLYTOPE_TOL) {
        return input(format!("x entry {v} exceeds 1"));
    }
    Ok(())
}

/// Random-order OCRS for matchings with an attenuation function.
#[derive(Clone, Debug)]
pub struct RoOcrs {
    graph: Graph,
    x: Vec<f64>,
    att: PreparedAttenuation,
}

impl RoOcrs {
    pub fn new(inst: &PricingInstance, x: &[f64], spec: &AttenuationSpec) -> Result<Self> {
        check_x(inst, x)?;
        let (graph, topo) = Graph::new(inst)?;
        let x: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let att = PreparedAttenuation::new(spec, &x, &edge_stats(&topo, &x))?;
        Ok(Self { graph, x, att })
    }
}

impl TrialEngine for RoOcrs {
    fn num_edges(&self) -> usize {
        self.graph.len()
    }
    fn num_vertices(&self) -> usize {
        self.graph.patience.len()
    }
    fn edge_ids(&self) -> &[u64] {
        &self.graph.ids
    }
    fn x(&self) -> &[f64] {
        &self.x
    }

    fn run(&self, rng: &TrialRng, out: &mut TrialOutcome) {
        out.reset(self.num_edges(), self.num_vertices());
        let mut atten = vec![0.0; self.num_edges()];
        for e in 0..self.num_edges() {
            let t = rng.uniform(e as u64, Purpose::Arrival);
            out.key[e] = (t, 0.0);
            atten[e] = self.att.at(e, t);
            out.active[e] = rng.uniform(e as u64, Purpose::Active) < self.x[e];
            out.realized[e] = out.active[e] && rng.uniform(e as u64, Purpose::Coin) < atten[e];
        }
        self.graph.sort(out);
        with_scratch(|free, cnt, seen| {
            self.graph.sweep(out, free, cnt, seen, false, |e, out| {
                out.accept_prob[e] = atten[e];
                (false, out.realized[e])
            })
        });
    }
}

/// Vertex-arrival variant on bipartite graphs: online vertices arrive in random
/// order and their edges are processed in random order, attenuated by `exp(-x_e t_e)`.
#[derive(Clone, Debug)]
pub struct VertexArrival {
    graph: Graph,
    x: Vec<f64>,
    online: Vec<usize>,
    att: PreparedAttenuation,
}

impl VertexArrival {
    pub fn new(inst: &PricingInstance, x: &[f64]) -> Result<Self> {
        if !inst.mode.is_bipartite() {
            return input(format!("vertex arrival needs a bipartite instance, got {:?}", inst.mode));
        }
        check_x(inst, x)?;
        let (graph, topo) = Graph::new(inst)?;
        let mut online = Vec::with_capacity(graph.len());
        for (e, &(a, b)) in graph.endpoints.iter().enumerate() {
            match (inst.vertices[a].side, inst.vertices[b].side) {
                (Side::Online, Side::Offline) => online.push(a),
                (Side::Offline, Side::Online) => online.push(b),
                _ => return input(format!("edge {} does not join an online and an offline vertex", graph.ids[e])),
            }
        }
        let x: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let att = PreparedAttenuation::new(&AttenuationSpec::a1(), &x, &edge_stats(&topo, &x))?;
        Ok(Self { graph, x, online, att })
    }
}

impl TrialEngine for VertexArrival {
    fn num_edges(&self) -> usize {
        self.graph.len()
    }
    fn num_vertices(&self) -> usize {
        self.graph.patience.len()
    }
    fn edge_ids(&self) -> &[u64] {
        &self.graph.ids
    }
    fn x(&self) -> &[f64] {
        &self.x
    }

    fn run(&self, rng: &TrialRng, out: &mut TrialOutcome) {
        out.reset(self.num_edges(), self.num_vertices());
        let mut atten = vec![0.0; self.num_edges()];
        for e in 0..self.num_edges() {
            let tu = rng.uniform(self.online[e] as u64, Purpose::OnlineArrival);
            let t = rng.uniform(e as u64, Purpose::Arrival);
            out.key[e] = (tu, t);
            atten[e] = self.att.at(e, t);
            out.active[e] = rng.uniform(e as u64, Purpose::Active) < self.x[e];
            out.realized[e] = out.active[e] && rng.uniform(e as u64, Purpose::Coin) < atten[e];
        }
        self.graph.sort(out);
        with_scratch(|free, cnt, seen| {
            self.graph.sweep(out, free, cnt, seen, false, |e, out| {
                out.accept_prob[e] = atten[e];
                (false, out.realized[e])
            })
        });
    }
}

/// Stochastic RO-OCRS: probe `e` with probability `y_e a(e)` when free and
/// patient; a probed edge is active with probability `p_e` and then must be matched.
#[derive(Clone, Debug)]
pub struct StochasticOcrs {
    graph: Graph,
    y: Vec<f64>,
    p: Vec<f64>,
    x: Vec<f64>,
    att: PreparedAttenuation,
}

impl StochasticOcrs {
    pub fn new(inst: &PricingInstance, y: &[f64], p: &[f64], spec: &AttenuationSpec) -> Result<Self> {
        let m = inst.edges.len();
        if y.len() != m || p.len() != m {
            return input("y and p must have one entry per edge");
        }
        for e in 0..m {
            if !(-POLYTOPE_TOL..=1.0 + POLYTOPE_TOL).contains(&y[e]) || !(0.0..=1.0).contains(&p[e]) {
                return input(format!("edge {}: y = {}, p = {} out of range", inst.edges[e].id, y[e], p[e]));
            }
        }
        let (graph, topo) = Graph::new(inst)?;
        let y: Vec<f64> = y.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let x: Vec<f64> = y.iter().zip(p).map(|(a, b)| a * b).collect();
        for v in 0..topo.num_vertices() {
            let load: f64 = topo.incident(v).iter().map(|&e| x[e]).sum();
            let probes: f64 = topo.incident(v).iter().map(|&e| y[e]).sum();
            if load > 1.0 + POLYTOPE_TOL || probes > graph.patience[v].as_f64() + POLYTOPE_TOL {
                return input(format!(
                    "vertex {}: sum y p = {load}, sum y = {probes}, patience {:?}",
                    inst.vertices[v].id, graph.patience[v]
                ));
            }
        }
        let att = PreparedAttenuation::new(spec, &x, &edge_stats(&topo, &x))?;
        Ok(Self { graph, y, p: p.to_vec(), x, att })
    }
}

impl TrialEngine for StochasticOcrs {
    fn num_edges(&self) -> usize {
        self.graph.len()
    }
    fn num_vertices(&self) -> usize {
        self.graph.patience.len()
    }
    fn edge_ids(&self) -> &[u64] {
        &self.graph.ids
    }
    fn x(&self) -> &[f64] {
        &self.x
    }

    fn run(&self, rng: &TrialRng, out: &mut TrialOutcome) {
        out.reset(self.num_edges(), self.num_vertices());
        let mut atten = vec![0.0; self.num_edges()];
        let mut probe = vec![false; self.num_edges()];
        for e in 0..self.num_edges() {
            let t = rng.uniform(e as u64, Purpose::Arrival);
            out.key[e] = (t, 0.0);
            atten[e] = self.att.at(e, t);
            probe[e] = rng.uniform(e as u64, Purpose::Coin) < self.y[e] * atten[e];
            out.active[e] = rng.uniform(e as u64, Purpose::Active) < self.p[e];
            out.realized[e] = probe[e] && out.active[e];
        }
        self.graph.sort(out);
        with_scratch(|free, cnt, seen| {
            self.graph.sweep(out, free, cnt, seen, true, |e, out| {
                out.accept_prob[e] = atten[e];
                (probe[e], probe[e] && out.active[e])
            })
        });
    }
}

/// Sequential posted pricing driven by an LP point.
#[derive(Clone, Debug)]
pub struct SequentialPricing {
    graph: Graph,
    /// Cumulative offer probabilities per edge.
    cum: Vec<Vec<f64>>,
    prob: Vec<Vec<f64>>,
    reward: Vec<Vec<f64>>,
    /// `sum_w y_ew p_ew r_ew` per edge.
    expected_reward: Vec<f64>,
    x: Vec<f64>,
    att: PreparedAttenuation,
}

impl SequentialPricing {
    pub fn new(inst: &PricingInstance, point: &FractionalPoint, spec: &AttenuationSpec, objective: Objective) -> Result<Self> {
        if point.y.len() != inst.edges.len() {
            return input("point does not match the instance");
        }
        let point = FractionalPoint::from_y(inst, point.y.clone())?;
        point.check(inst)?;
        let (graph, topo) = Graph::new(inst)?;
        let mut cum = Vec::with_capacity(inst.edges.len());
        let mut prob = Vec::with_capacity(inst.edges.len());
        let mut reward = Vec::with_capacity(inst.edges.len());
        let mut expected_reward = Vec::with_capacity(inst.edges.len());
        for (e, edge) in inst.edges.iter().enumerate() {
            let mut acc = 0.0;
            cum.push(point.y[e].iter().map(|&v| {
                acc += v.max(0.0);
                acc
            }).collect());
            prob.push(edge.menu.iter().map(|m| m.prob).collect::<Vec<_>>());
            let r: Vec<f64> = (0..edge.menu.len())
                .map(|w| {
                    let c = crate::lp::coefficient(inst, e, w, objective)?;
                    let p = edge.menu[w].prob;
                    // reward on acceptance; entries with p = 0 never pay
                    Ok(if p > 0.0 { c / p } else { 0.0 })
                })
                .collect::<Result<_>>()?;
            expected_reward.push(point.y[e].iter().zip(&edge.menu).zip(&r).map(|((y, m), r)| y.max(0.0) * m.prob * r).sum());
            reward.push(r);
        }
        let x: Vec<f64> = point.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let att = PreparedAttenuation::new(spec, &x, &edge_stats(&topo, &x))?;
        Ok(Self {
            graph,
            cum,
            prob,
            reward,
            expected_reward,
            x,
            att,
        })
    }
}

impl TrialEngine for SequentialPricing {
    fn num_edges(&self) -> usize {
        self.graph.len()
    }
    fn num_vertices(&self) -> usize {
        self.graph.patience.len()
    }
    fn edge_ids(&self) -> &[u64] {
        &self.graph.ids
    }
    fn x(&self) -> &[f64] {
        &self.x
    }

    fn run(&self, rng: &TrialRng, out: &mut TrialOutcome) {
        out.reset(self.num_edges(), self.num_vertices());
        let m = self.num_edges();
        let mut atten = vec![0.0; m];
        let mut price: Vec<Option<usize>> = vec![None; m];
        let mut coin = vec![false; m];
        for e in 0..m {
            let t = rng.uniform(e as u64, Purpose::Arrival);
            out.key[e] = (t, 0.0);
            atten[e] = self.att.at(e, t);
            let u = rng.uniform(e as u64, Purpose::Price);
            price[e] = self.cum[e].iter().position(|&c| u < c);
            coin[e] = rng.uniform(e as u64, Purpose::Coin) < atten[e];
            let a = rng.uniform(e as u64, Purpose::Active);
            out.active[e] = price[e].is_some_and(|w| a < self.prob[e][w]);
            out.realized[e] = coin[e] && out.active[e];
        }
        self.graph.sort(out);
        let mut revenue = 0.0;
        let mut revenue_cond = 0.0;
        with_scratch(|free, cnt, seen| {
            self.graph.sweep(out, free, cnt, seen, true, |e, out| {
                out.accept_prob[e] = atten[e];
                revenue_cond += atten[e] * self.expected_reward[e];
                let Some(w) = price[e] else {
                    return (false, false);
                };
                if !coin[e] {
                    return (false, false);
                }
                if out.active[e] {
                    revenue += self.reward[e][w];
                }
                (true, out.active[e])
            })
        });
        out.revenue = revenue;
        out.revenue_cond = revenue_cond;
    }
}

pub fn run_ro_ocrs_trial(inst: &PricingInstance, x: &[f64], spec: &AttenuationSpec, rng: &TrialRng) -> Result<TrialOutcome> {
    Ok(RoOcrs::new(inst, x, spec)?.trial(rng))
}

pub fn run_stochastic_ocrs_trial(inst: &PricingInstance, y: &[f64], p: &[f64], spec: &AttenuationSpec, rng: &TrialRng) -> Result<TrialOutcome> {
    Ok(StochasticOcrs::new(inst, y, p, spec)?.trial(rng))
}

pub fn run_vertex_arrival_trial(inst: &PricingInstance, x: &[f64], rng: &TrialRng) -> Result<TrialOutcome> {
    Ok(VertexArrival::new(inst, x)?.trial(rng))
}

pub fn run_sequential_pricing_trial(inst: &PricingInstance, point: &FractionalPoint, spec: &AttenuationSpec, rng: &TrialRng) -> Result<TrialOutcome> {
    Ok(SequentialPricing::new(inst, point, spec, Objective::Revenue)?.trial(rng))
}
