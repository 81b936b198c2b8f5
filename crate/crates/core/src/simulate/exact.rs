//! Exact references: the no-attenuation OCRS on tiny graphs, the optimal
//! adaptive pricing policy, and fixed-order greedy policies.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::graph::{validate_instance, PricingInstance, Topology};
use crate::lp::{coefficient, Objective};

pub const ORACLE_EDGE_LIMIT: usize = 10;
pub const DP_OPTION_LIMIT: usize = 12;

fn endpoint_masks(inst: &PricingInstance) -> Result<(Topology, Vec<u64>)> {
    let topo = Topology::new(inst)?;
    if topo.num_vertices() > 64 {
        return Err(Error::Refused(format!("{} vertices, exact routines handle at most 64", topo.num_vertices())));
    }
    let masks = (0..topo.num_edges())
        .map(|e| {
            let (a, b) = topo.endpoints(e);
            (1u64 << a) | (1u64 << b)
        })
        .collect();
    Ok((topo, masks))
}

/// Exact `Pr[e matched]` for the OCRS without attenuation: edges arrive in
/// uniformly random order, are active independently with probability `x_e`,
/// and are matched when active and free. Equivalent to summing over all
/// orders and active sets, but memoized on (unprocessed edges, matched vertices).
pub fn exact_trivial_oracle(inst: &PricingInstance, x: &[f64]) -> Result<Vec<f64>> {
    let m = inst.edges.len();
    if m > ORACLE_EDGE_LIMIT {
        return Err(Error::Refused(format!("{m} edges; the exact oracle handles at most {ORACLE_EDGE_LIMIT}")));
    }
    if x.len() != m {
        return input("x length does not match edge count");
    }
    let (_, masks) = endpoint_masks(inst)?;
    let mut memo: HashMap<(u32, u64), Vec<f64>> = HashMap::new();

    fn rec(rest: u32, used: u64, x: &[f64], masks: &[u64], memo: &mut HashMap<(u32, u64), Vec<f64>>) -> Vec<f64> {
        if rest == 0 {
            return vec![0.0; x.len()];
        }
        if let Some(v) = memo.get(&(rest, used)) {
            return v.clone();
        }
        let k = rest.count_ones() as f64;
        let mut out = vec![0.0; x.len()];
        for f in 0..x.len() {
            if rest & (1 << f) == 0 {
                continue;
            }
            let next = rest & !(1 << f);
            let skip = rec(next, used, x, masks, memo);
            if used & masks[f] == 0 && x[f] > 0.0 {
                let take = rec(next, used | masks[f], x, masks, memo);
                for e in 0..x.len() {
                    out[e] += (x[f] * take[e] + (1.0 - x[f]) * skip[e]) / k;
                }
                out[f] += x[f] / k;
            } else {
                for e in 0..x.len() {
                    out[e] += skip[e] / k;
                }
            }
        }
        memo.insert((rest, used), out.clone());
        out
    }

    let all = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    Ok(rec(all, 0, x, &masks, &mut memo))
}

/// Reward per accepted offer of every menu entry.
fn rewards(inst: &PricingInstance, objective: Objective) -> Result<Vec<Vec<(f64, f64)>>> {
    (0..inst.edges.len())
        .map(|e| {
            (0..inst.edges[e].menu.len())
                .map(|w| {
                    let p = inst.edges[e].menu[w].prob;
                    let c = coefficient(inst, e, w, objective)?;
                    Ok((p, if p > 0.0 { c / p } else { 0.0 }))
                })
                .collect()
        })
        .collect()
}

struct PolicyCtx {
    masks: Vec<u64>,
    endpoints: Vec<(usize, usize)>,
    limit: Vec<Option<u32>>,
    incident: Vec<u64>,
    menu: Vec<Vec<(f64, f64)>>,
}

impl PolicyCtx {
    fn new(inst: &PricingInstance, objective: Objective) -> Result<Self> {
        let violations = validate_instance(inst);
        if let Some(v) = violations.first() {
            return input(format!("invalid instance: {v}"));
        }
        if inst.edges.len() > 64 {
            return Err(Error::Refused(format!("{} edges, exact routines handle at most 64", inst.edges.len())));
        }
        let (topo, masks) = endpoint_masks(inst)?;
        let incident = (0..topo.num_vertices())
            .map(|v| topo.incident(v).iter().fold(0u64, |m, &e| m | (1 << e)))
            .collect();
        Ok(Self {
            masks,
            endpoints: (0..topo.num_edges()).map(|e| topo.endpoints(e)).collect(),
            limit: inst.vertices.iter().map(|v| v.patience.limit()).collect(),
            incident,
            menu: rewards(inst, objective)?,
        })
    }

    /// May edge `e` still be offered, given matched vertices and offered edges?
    fn open(&self, e: usize, matched: u64, offered: u64) -> bool {
        if offered & (1 << e) != 0 || matched & self.masks[e] != 0 {
            return false;
        }
        let (a, b) = self.endpoints[e];
        [a, b].iter().all(|&v| match self.limit[v] {
            Some(l) => (self.incident[v] & offered).count_ones() < l,
            None => true,
        })
    }
}

/// Optimal expected objective of any adaptive policy that offers each edge at
/// most once, one price per offer, and may stop at any time.
pub fn optimal_policy_dp(inst: &PricingInstance, objective: Objective) -> Result<f64> {
    let options: usize = inst.edges.iter().map(|e| e.menu.len()).sum();
    if options > DP_OPTION_LIMIT {
        return Err(Error::Refused(format!(
            "{options} price options (limit {DP_OPTION_LIMIT}); up to 2^{} offered-edge sets times matched-vertex sets",
            inst.edges.len()
        )));
    }
    let ctx = PolicyCtx::new(inst, objective)?;
    let mut memo = HashMap::new();

    fn value(ctx: &PolicyCtx, matched: u64, offered: u64, memo: &mut HashMap<(u64, u64), f64>) -> f64 {
        if let Some(&v) = memo.get(&(matched, offered)) {
            return v;
        }
        let mut best = 0.0f64;
        for e in 0..ctx.masks.len() {
            if !ctx.open(e, matched, offered) {
                continue;
            }
            let o = offered | (1 << e);
            let reject = value(ctx, matched, o, memo);
            let accept = value(ctx, matched | ctx.masks[e], o, memo);
            for &(p, r) in &ctx.menu[e] {
                best = best.max(p * (r + accept) + (1.0 - p) * reject);
            }
        }
        memo.insert((matched, offered), best);
        best
    }

    Ok(value(&ctx, 0, 0, &mut memo))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyRule {
    ByWeight,
    ByExpectedWeight,
}

/// All `(edge, menu entry)` options in decreasing key order, ties by edge id then entry.
pub fn greedy_order(inst: &PricingInstance, rule: GreedyRule) -> Vec<(usize, usize)> {
    let mut opts: Vec<(usize, usize, f64)> = Vec::new();
    for (e, edge) in inst.edges.iter().enumerate() {
        for (w, m) in edge.menu.iter().enumerate() {
            let key = match rule {
                GreedyRule::ByWeight => m.price,
                GreedyRule::ByExpectedWeight => m.price * m.prob,
            };
            opts.push((e, w, key));
        }
    }
    opts.sort_by(|a, b| {
        b.2.total_cmp(&a.2)
            .then(inst.edges[a.0].id.cmp(&inst.edges[b.0].id))
            .then(a.1.cmp(&b.1))
    });
    opts.into_iter().map(|(e, w, _)| (e, w)).collect()
}

/// Exact expected objective of offering the options in `order`, skipping
/// options whose edge was already offered, is blocked, or lacks patience.
pub fn fixed_order_value(inst: &PricingInstance, order: &[(usize, usize)], objective: Objective) -> Result<f64> {
    let ctx = PolicyCtx::new(inst, objective)?;
    if let Some(&(e, w)) = order.iter().find(|&&(e, w)| e >= ctx.menu.len() || w >= ctx.menu[e].len()) {
        return input(format!("order refers to a missing option ({e}, {w})"));
    }
    let mut memo = HashMap::new();

    fn value(ctx: &PolicyCtx, order: &[(usize, usize)], i: usize, matched: u64, offered: u64, memo: &mut HashMap<(usize, u64, u64), f64>) -> f64 {
        let Some(step) = (i..order.len()).find(|&j| ctx.open(order[j].0, matched, offered)) else {
            return 0.0;
        };
        if let Some(&v) = memo.get(&(step, matched, offered)) {
            return v;
        }
        let (e, w) = order[step];
        let (p, r) = ctx.menu[e][w];
        let o = offered | (1 << e);
        let mut v = 0.0;
        if p > 0.0 {
            v += p * (r + value(ctx, order, step + 1, matched | ctx.masks[e], o, memo));
        }
        if p < 1.0 {
            v += (1.0 - p) * value(ctx, order, step + 1, matched, o, memo);
        }
        memo.insert((step, matched, offered), v);
        v
    }

    Ok(value(&ctx, order, 0, 0, 0, &mut memo))
}

pub fn greedy_baseline(inst: &PricingInstance, rule: GreedyRule, objective: Objective) -> Result<f64> {
    fixed_order_value(inst, &greedy_order(inst, rule), objective)
}
