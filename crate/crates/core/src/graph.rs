//! Instances, polytope checks, per-edge contention statistics, and the
//! generator families used throughout the test suites.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::rng::{CounterRng, Purpose};

/// Absolute tolerance for every polytope and LP feasibility check.
pub const POLYTOPE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Offline,
    Online,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Patience {
    Limited(u32),
    Unbounded,
}

impl Patience {
    pub fn limit(self) -> Option<u32> {
        match self {
            Patience::Limited(l) => Some(l),
            Patience::Unbounded => None,
        }
    }

    /// True when a vertex that has already been probed `used` times may be probed again.
    #[inline]
    pub fn allows(self, used: u32) -> bool {
        match self {
            Patience::Limited(l) => used < l,
            Patience::Unbounded => true,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Patience::Limited(l) => l as f64,
            Patience::Unbounded => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    General,
    Bipartite,
    BipartiteOneSidedPatience,
    VertexArrival,
}

impl Mode {
    pub fn is_bipartite(self) -> bool {
        !matches!(self, Mode::General)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: u64,
    pub side: Side,
    /// Value collected when this vertex is matched; workers carry zero.
    pub value: f64,
    pub patience: Patience,
}

impl Vertex {
    pub fn new(id: u64, side: Side) -> Self {
        Self {
            id,
            side,
            value: 0.0,
            patience: Patience::Unbounded,
        }
    }
}

/// One take-it-or-leave-it price on an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MenuEntry {
    pub price: f64,
    pub prob: f64,
    /// Reward collected if this offer is accepted, for custom objectives.
    pub coef: Option<f64>,
}

impl MenuEntry {
    pub fn new(price: f64, prob: f64) -> Self {
        Self {
            price,
            prob,
            coef: None,
        }
    }

    pub fn with_coef(price: f64, prob: f64, coef: f64) -> Self {
        Self {
            price,
            prob,
            coef: Some(coef),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: u64,
    pub u: u64,
    pub v: u64,
    pub menu: Vec<MenuEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PricingInstance {
    pub mode: Mode,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subject {
    Instance,
    Vertex(u64),
    Edge(u64),
    MenuEntry { edge: u64, index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    DuplicateVertexId,
    DuplicateEdgeId,
    UnknownEndpoint,
    SelfLoop,
    MissingSide,
    SameSide,
    ProbabilityRange,
    NonFinite,
    NegativeValue,
    ZeroPatience,
    OneSidedPatience,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub subject: Subject,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} violates {:?}: {}", self.subject, self.rule, self.detail)
    }
}

/// Lists every invariant violation; an empty list means the instance is well formed.
pub fn validate_instance(inst: &PricingInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |subject, rule, detail: String| out.push(Violation { subject, rule, detail });

    let mut sides = HashMap::new();
    for v in &inst.vertices {
        if sides.insert(v.id, v.side).is_some() {
            push(Subject::Vertex(v.id), Rule::DuplicateVertexId, format!("vertex id {} repeated", v.id));
        }
        if !v.value.is_finite() {
            push(Subject::Vertex(v.id), Rule::NonFinite, format!("value {}", v.value));
        } else if v.value < 0.0 {
            push(Subject::Vertex(v.id), Rule::NegativeValue, format!("value {}", v.value));
        }
        if v.patience == Patience::Limited(0) {
            push(Subject::Vertex(v.id), Rule::ZeroPatience, "patience must be at least 1".into());
        }
        if inst.mode.is_bipartite() && v.side == Side::None {
            push(Subject::Vertex(v.id), Rule::MissingSide, format!("{:?} mode needs side tags", inst.mode));
        }
    }

    let mut edge_ids = HashSet::new();
    for e in &inst.edges {
        if !edge_ids.insert(e.id) {
            push(Subject::Edge(e.id), Rule::DuplicateEdgeId, format!("edge id {} repeated", e.id));
        }
        match (sides.get(&e.u), sides.get(&e.v)) {
            (Some(su), Some(sv)) => {
                if e.u == e.v {
                    push(Subject::Edge(e.id), Rule::SelfLoop, format!("both endpoints are {}", e.u));
                } else if inst.mode.is_bipartite() && *su != Side::None && su == sv {
                    push(
                        Subject::Edge(e.id),
                        Rule::SameSide,
                        format!("endpoints {} and {} are both {:?}", e.u, e.v, su),
                    );
                }
            }
            _ => push(
                Subject::Edge(e.id),
                Rule::UnknownEndpoint,
                format!("endpoints ({}, {}) must both exist", e.u, e.v),
            ),
        }
        for (index, m) in e.menu.iter().enumerate() {
            let subject = Subject::MenuEntry { edge: e.id, index };
            if !m.price.is_finite() || !m.prob.is_finite() || m.coef.is_some_and(|c| !c.is_finite()) {
                push(subject, Rule::NonFinite, format!("{m:?}"));
            } else if !(0.0..=1.0).contains(&m.prob) {
                push(subject, Rule::ProbabilityRange, format!("p = {} outside [0, 1]", m.prob));
            }
        }
    }

    if inst.mode == Mode::BipartiteOneSidedPatience {
        let side_unbounded = |s: Side| {
            inst.vertices
                .iter()
                .filter(|v| v.side == s)
                .all(|v| v.patience == Patience::Unbounded)
        };
        if !side_unbounded(Side::Offline) && !side_unbounded(Side::Online) {
            push(
                Subject::Instance,
                Rule::OneSidedPatience,
                "one side must have unbounded patience everywhere".into(),
            );
        }
    }
    out
}

/// Index-based adjacency for a validated instance. Edge and vertex indices are
/// positions in `PricingInstance::edges` / `vertices`.
#[derive(Clone, Debug)]
pub struct Topology {
    endpoints: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new(inst: &PricingInstance) -> Result<Self> {
        let index: HashMap<u64, usize> = inst
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id, i))
            .collect();
        let mut incident = vec![Vec::new(); inst.vertices.len()];
        let mut endpoints = Vec::with_capacity(inst.edges.len());
        for (k, e) in inst.edges.iter().enumerate() {
            let (Some(&a), Some(&b)) = (index.get(&e.u), index.get(&e.v)) else {
                return input(format!("edge {} references a missing vertex", e.id));
            };
            if a == b {
                return input(format!("edge {} is a self-loop", e.id));
            }
            endpoints.push((a, b));
            incident[a].push(k);
            incident[b].push(k);
        }
        let neighbors = endpoints
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let mut n: Vec<usize> = incident[a]
                    .iter()
                    .chain(&incident[b])
                    .copied()
                    .filter(|&f| f != k)
                    .collect();
                n.sort_unstable();
                n.dedup();
                n
            })
            .collect();
        Ok(Self {
            endpoints,
            incident,
            neighbors,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.endpoints.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.incident.len()
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.endpoints[e]
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Edges sharing at least one endpoint with `e`, excluding `e`.
    pub fn neighbors(&self, e: usize) -> &[usize] {
        &self.neighbors[e]
    }

    fn other(&self, f: usize, v: usize) -> usize {
        let (a, b) = self.endpoints[f];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Neighbors of `e` that close a triangle with it.
    pub fn triangle_partners(&self, e: usize) -> Vec<usize> {
        let (a, b) = self.endpoints[e];
        let mut out = Vec::new();
        for &f in &self.neighbors[e] {
            let (fa, fb) = self.endpoints[f];
            // parallel copies of e share both endpoints and close no triangle
            if (fa == a && fb == b) || (fa == b && fb == a) {
                continue;
            }
            let (shared, rest) = if fa == a || fb == a { (a, b) } else { (b, a) };
            let apex = self.other(f, shared);
            if self.incident[apex].iter().any(|&g| self.other(g, apex) == rest) {
                out.push(f);
            }
        }
        out
    }
}

/// Resolves `(edge id, value)` pairs into a vector aligned with `inst.edges`.
/// Edges that are not mentioned get zero.
pub fn edge_vector(inst: &PricingInstance, pairs: &[(u64, f64)]) -> Result<Vec<f64>> {
    let index: HashMap<u64, usize> = inst.edges.iter().enumerate().map(|(i, e)| (e.id, i)).collect();
    let mut x = vec![0.0; inst.edges.len()];
    for &(id, value) in pairs {
        match index.get(&id) {
            Some(&k) => x[k] = value,
            None => return input(format!("unknown edge id {id}")),
        }
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolytopeViolation {
    VertexLoad { vertex: u64, load: f64 },
    NegativeEntry { edge: u64, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeCheck {
    pub feasible: bool,
    /// Largest violation found, present only when infeasible.
    pub worst: Option<PolytopeViolation>,
}

/// Membership in the fractional matching polytope `{x >= 0, sum_{e ∋ v} x_e <= 1}`.
pub fn check_polytope(inst: &PricingInstance, x: &[f64]) -> Result<PolytopeCheck> {
    if x.len() != inst.edges.len() {
        return input(format!("x has {} entries for {} edges", x.len(), inst.edges.len()));
    }
    if let Some(k) = x.iter().position(|v| !v.is_finite()) {
        return input(format!("x[{}] is not finite", inst.edges[k].id));
    }
    let topo = Topology::new(inst)?;
    let mut worst: Option<(f64, PolytopeViolation)> = None;
    let mut consider = |excess: f64, v: PolytopeViolation| {
        if excess > POLYTOPE_TOL && worst.is_none_or(|(w, _)| excess > w) {
            worst = Some((excess, v));
        }
    };
    for (k, &xe) in x.iter().enumerate() {
        consider(-xe, PolytopeViolation::NegativeEntry { edge: inst.edges[k].id, value: xe });
    }
    for v in 0..topo.num_vertices() {
        let load: f64 = topo.incident(v).iter().map(|&e| x[e]).sum();
        consider(load - 1.0, PolytopeViolation::VertexLoad { vertex: inst.vertices[v].id, load });
    }
    Ok(PolytopeCheck {
        feasible: worst.is_none(),
        worst: worst.map(|(_, v)| v),
    })
}

/// Contention statistics of one edge under a fixed fractional point.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeStats {
    /// Fractional mass on the neighborhood, `sum_{f in N_e} x_f`.
    pub d: f64,
    /// Slack `2 - d - x_e`.
    pub s: f64,
    /// Largest `x_f` over neighbors closing a triangle with `e`.
    pub m: f64,
    pub neighbors: Vec<usize>,
}

pub fn edge_stats(topo: &Topology, x: &[f64]) -> Vec<EdgeStats> {
    (0..topo.num_edges())
        .map(|e| {
            let neighbors = topo.neighbors(e).to_vec();
            let d: f64 = neighbors.iter().map(|&f| x[f]).sum();
            let m = topo
                .triangle_partners(e)
                .into_iter()
                .map(|f| x[f])
                .fold(0.0, f64::max);
            EdgeStats {
                d,
                s: 2.0 - d - x[e],
                m,
                neighbors,
            }
        })
        .collect()
}

/// Convenience wrapper resolving the topology first.
pub fn instance_edge_stats(inst: &PricingInstance, x: &[f64]) -> Result<Vec<EdgeStats>> {
    if x.len() != inst.edges.len() {
        return input("x length does not match edge count");
    }
    Ok(edge_stats(&Topology::new(inst)?, x))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    TightPath3 { n: u32 },
    Star { k: u32 },
    Triangle,
    RandomBipartite { offline: u32, online: u32, density: f64, seed: u64 },
    RandomGeneral { n: u32, density: f64, seed: u64 },
    GreedyCounterexampleD1 { eps: f64 },
    GreedyCounterexampleD2 { base: f64, k: u32, eps: f64 },
    SingleEdgeHard { k: f64, grid: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub instance: PricingInstance,
    /// Fractional point for the OCRS families.
    pub x: Option<Vec<f64>>,
}

fn unit_menu() -> Vec<MenuEntry> {
    vec![MenuEntry::new(0.0, 1.0)]
}

fn edge(id: usize, u: usize, v: usize, menu: Vec<MenuEntry>) -> Edge {
    Edge {
        id: id as u64,
        u: u as u64,
        v: v as u64,
        menu,
    }
}

fn star_instance(k: usize, menus: impl Fn(usize) -> Vec<MenuEntry>) -> PricingInstance {
    let mut vertices = vec![Vertex::new(0, Side::Offline)];
    vertices.extend((1..=k).map(|i| Vertex::new(i as u64, Side::Online)));
    let edges = (0..k).map(|i| edge(i, 0, i + 1, menus(i))).collect();
    PricingInstance {
        mode: Mode::Bipartite,
        vertices,
        edges,
    }
}

/// Scales raw positive weights into the polytope: each edge is divided by the
/// larger raw load of its endpoints (and at least 1).
fn scale_into_polytope(endpoints: &[(usize, usize)], n: usize, raw: &[f64]) -> Vec<f64> {
    let mut load = vec![0.0; n];
    for (&(a, b), &r) in endpoints.iter().zip(raw) {
        load[a] += r;
        load[b] += r;
    }
    endpoints
        .iter()
        .zip(raw)
        .map(|(&(a, b), &r)| r / load[a].max(load[b]).max(1.0))
        .collect()
}

/// Two prices per edge below the job value, with acceptance growing in the price.
fn random_menu(seq: &mut crate::rng::Sequence, value: f64) -> Vec<MenuEntry> {
    let mut prices = [0.15 + 0.35 * seq.next_f64(), 0.5 + 0.45 * seq.next_f64()];
    prices.sort_by(f64::total_cmp);
    let shape = 0.5 + seq.next_f64();
    prices
        .iter()
        .map(|&frac| MenuEntry::new(frac * value, frac.powf(shape)))
        .collect()
}

fn check_density(density: f64) -> Result<()> {
    if !(density > 0.0 && density <= 1.0) {
        return input(format!("density {density} outside (0, 1]"));
    }
    Ok(())
}

pub fn generate_family(family: &Family) -> Result<Generated> {
    match *family {
        Family::TightPath3 { n } => {
            if n < 2 {
                return input("tight_path3 needs n >= 2");
            }
            let big = 1.0 - 1.0 / n as f64;
            let sides = [Side::Offline, Side::Online, Side::Offline, Side::Online];
            let vertices = sides
                .iter()
                .enumerate()
                .map(|(i, &s)| Vertex::new(i as u64, s))
                .collect();
            let edges = (0..3).map(|i| edge(i, i, i + 1, unit_menu())).collect();
            Ok(Generated {
                instance: PricingInstance {
                    mode: Mode::Bipartite,
                    vertices,
                    edges,
                },
                x: Some(vec![big, 1.0 / n as f64, big]),
            })
        }
        Family::Star { k } => {
            if k < 1 {
                return input("star needs k >= 1");
            }
            let k = k as usize;
            Ok(Generated {
                instance: star_instance(k, |_| unit_menu()),
                x: Some(vec![1.0 / k as f64; k]),
            })
        }
        Family::Triangle => {
            let vertices = (0..3).map(|i| Vertex::new(i, Side::None)).collect();
            let edges = vec![
                edge(0, 0, 1, unit_menu()),
                edge(1, 1, 2, unit_menu()),
                edge(2, 0, 2, unit_menu()),
            ];
            Ok(Generated {
                instance: PricingInstance {
                    mode: Mode::General,
                    vertices,
                    edges,
                },
                x: Some(vec![0.5; 3]),
            })
        }
        Family::RandomBipartite {
            offline,
            online,
            density,
            seed,
        } => {
            if offline < 1 || online < 1 || offline + online < 2 {
                return input("random_bipartite needs at least one vertex per side");
            }
            check_density(density)?;
            let rng = CounterRng::new(seed).trial(0);
            let mut seq = rng.sequence(Purpose::Generator);
            let (nl, nr) = (offline as usize, online as usize);
            let mut vertices: Vec<Vertex> = (0..nl).map(|i| Vertex::new(i as u64, Side::Offline)).collect();
            for j in 0..nr {
                let mut v = Vertex::new((nl + j) as u64, Side::Online);
                v.value = 1.0 + seq.next_f64();
                vertices.push(v);
            }
            let mut endpoints = Vec::new();
            let mut edges = Vec::new();
            for i in 0..nl {
                for j in 0..nr {
                    if seq.next_bool(density) {
                        let menu = random_menu(&mut seq, vertices[nl + j].value);
                        edges.push(edge(edges.len(), i, nl + j, menu));
                        endpoints.push((i, nl + j));
                    }
                }
            }
            let raw: Vec<f64> = endpoints.iter().map(|_| 0.05 + 0.95 * seq.next_f64()).collect();
            let x = scale_into_polytope(&endpoints, nl + nr, &raw);
            Ok(Generated {
                instance: PricingInstance {
                    mode: Mode::Bipartite,
                    vertices,
                    edges,
                },
                x: Some(x),
            })
        }
        Family::RandomGeneral { n, density, seed } => {
            if n < 2 {
                return input("random_general needs n >= 2");
            }
            check_density(density)?;
            let rng = CounterRng::new(seed).trial(0);
            let mut seq = rng.sequence(Purpose::Generator);
            let n = n as usize;
            let mut vertices = Vec::with_capacity(n);
            for i in 0..n {
                let mut v = Vertex::new(i as u64, Side::None);
                v.value = 0.5 + 0.5 * seq.next_f64();
                vertices.push(v);
            }
            let mut endpoints = Vec::new();
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if seq.next_bool(density) {
                        let value = vertices[a].value + vertices[b].value;
                        let menu = random_menu(&mut seq, value);
                        edges.push(edge(edges.len(), a, b, menu));
                        endpoints.push((a, b));
                    }
                }
            }
            let raw: Vec<f64> = endpoints.iter().map(|_| 0.05 + 0.95 * seq.next_f64()).collect();
            let x = scale_into_polytope(&endpoints, n, &raw);
            Ok(Generated {
                instance: PricingInstance {
                    mode: Mode::General,
                    vertices,
                    edges,
                },
                x: Some(x),
            })
        }
        Family::GreedyCounterexampleD1 { eps } => {
            if !(eps > 0.0 && eps <= 1.0) {
                return input("d1 needs eps in (0, 1]");
            }
            let vertices = vec![Vertex::new(0, Side::Offline), Vertex::new(1, Side::Online)];
            let menu = vec![MenuEntry::with_coef(1.0, 1.0, 1.0), MenuEntry::with_coef(2.0, eps, 2.0)];
            Ok(Generated {
                instance: PricingInstance {
                    mode: Mode::Bipartite,
                    vertices,
                    edges: vec![edge(0, 0, 1, menu)],
                },
                x: None,
            })
        }
        Family::GreedyCounterexampleD2 { base, k, eps } => {
            if base < 2.0 || k < 1 || !(eps > 0.0 && eps.is_finite()) {
                return input("d2 needs N >= 2, k >= 1, eps > 0");
            }
            let instance = star_instance(k as usize + 1, |i| {
                if i == 0 {
                    vec![MenuEntry::with_coef(1.0 + eps, 1.0, 1.0 + eps)]
                } else {
                    let w = base.powi(i as i32);
                    vec![MenuEntry::with_coef(w, 1.0 / w, w)]
                }
            });
            Ok(Generated { instance, x: None })
        }
        Family::SingleEdgeHard { k, ref grid } => {
            if !(k >= 2.0 && k.is_finite()) {
                return input("single_edge_hard needs k >= 2");
            }
            if grid.is_empty() {
                return input("single_edge_hard needs a nonempty price grid");
            }
            if let Some(w) = grid.iter().find(|&&w| !(0.0..=k - 1.0).contains(&w)) {
                return input(format!("grid price {w} outside [0, k-1]"));
            }
            let mut job = Vertex::new(1, Side::Online);
            job.value = k;
            let vertices = vec![Vertex::new(0, Side::Offline), job];
            let menu = grid.iter().map(|&w| MenuEntry::new(w, 1.0 / (k - w))).collect();
            Ok(Generated {
                instance: PricingInstance {
                    mode: Mode::Bipartite,
                    vertices,
                    edges: vec![edge(0, 0, 1, menu)],
                },
                x: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_abs_diff_eq;

    fn single_edge() -> PricingInstance {
        PricingInstance {
            mode: Mode::General,
            vertices: vec![Vertex::new(0, Side::None), Vertex::new(1, Side::None)],
            edges: vec![edge(0, 0, 1, vec![MenuEntry::new(1.0, 0.5)])],
        }
    }

    fn path(n_edges: usize) -> PricingInstance {
        PricingInstance {
            mode: Mode::General,
            vertices: (0..=n_edges).map(|i| Vertex::new(i as u64, Side::None)).collect(),
            edges: (0..n_edges).map(|i| edge(i, i, i + 1, unit_menu())).collect(),
        }
    }

    #[test]
    fn well_formed_single_edge_validates() {
        assert!(validate_instance(&single_edge()).is_empty());
    }

    #[test]
    fn probability_above_one_is_reported() {
        let mut inst = single_edge();
        inst.edges[0].menu[0].prob = 1.3;
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::ProbabilityRange);
        assert_eq!(v[0].subject, Subject::MenuEntry { edge: 0, index: 0 });
    }

    #[test]
    fn bipartite_edge_inside_one_side_is_reported() {
        let inst = PricingInstance {
            mode: Mode::Bipartite,
            vertices: vec![Vertex::new(0, Side::Offline), Vertex::new(1, Side::Offline)],
            edges: vec![edge(0, 0, 1, unit_menu())],
        };
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::SameSide);
    }

    #[test]
    fn structural_violations() {
        let mut inst = single_edge();
        inst.vertices.push(Vertex::new(1, Side::None));
        inst.edges.push(edge(0, 0, 7, unit_menu()));
        inst.edges.push(edge(2, 0, 0, unit_menu()));
        inst.vertices[0].patience = Patience::Limited(0);
        let rules: HashSet<Rule> = validate_instance(&inst).into_iter().map(|v| v.rule).collect();
        for r in [
            Rule::DuplicateVertexId,
            Rule::DuplicateEdgeId,
            Rule::UnknownEndpoint,
            Rule::SelfLoop,
            Rule::ZeroPatience,
        ] {
            assert!(rules.contains(&r), "{r:?} missing");
        }
    }

    #[test]
    fn one_sided_patience_requires_an_unbounded_side() {
        let mut inst = generate_family(&Family::Star { k: 2 }).unwrap().instance;
        inst.mode = Mode::BipartiteOneSidedPatience;
        inst.vertices[0].patience = Patience::Limited(1);
        assert!(validate_instance(&inst).is_empty());
        inst.vertices[1].patience = Patience::Limited(2);
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::OneSidedPatience);
    }

    #[test]
    fn polytope_examples() {
        let star = generate_family(&Family::Star { k: 3 }).unwrap();
        let x = vec![1.0 / 3.0; 3];
        assert!(check_polytope(&star.instance, &x).unwrap().feasible);

        assert!(check_polytope(&single_edge(), &[1.0]).unwrap().feasible);

        let p2 = path(2);
        let c = check_polytope(&p2, &[0.7, 0.7]).unwrap();
        assert!(!c.feasible);
        match c.worst {
            Some(PolytopeViolation::VertexLoad { vertex, load }) => {
                assert_eq!(vertex, 1);
                assert_abs_diff_eq!(load, 1.4, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        let neg = check_polytope(&p2, &[-0.1, 0.2]).unwrap();
        assert_eq!(neg.worst, Some(PolytopeViolation::NegativeEntry { edge: 0, value: -0.1 }));
    }

    #[test]
    fn unknown_edge_ids_are_input_errors() {
        assert!(matches!(edge_vector(&single_edge(), &[(5, 0.1)]), Err(Error::Input(_))));
        assert_eq!(edge_vector(&single_edge(), &[(0, 0.25)]).unwrap(), vec![0.25]);
        assert!(check_polytope(&single_edge(), &[0.1, 0.2]).is_err());
    }

    #[test]
    fn stats_examples() {
        let s = instance_edge_stats(&single_edge(), &[0.5]).unwrap();
        assert_eq!(s[0].d, 0.0);
        assert_abs_diff_eq!(s[0].s, 1.5);
        assert_eq!(s[0].m, 0.0);

        let s = instance_edge_stats(&path(3), &[0.9, 0.1, 0.9]).unwrap();
        assert_abs_diff_eq!(s[1].d, 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1].s, 0.1, epsilon = 1e-12);
        assert_eq!(s[1].m, 0.0);
        assert_eq!(s[1].neighbors, vec![0, 2]);

        let tri = generate_family(&Family::Triangle).unwrap().instance;
        let s = instance_edge_stats(&tri, &[0.4, 0.4, 0.2]).unwrap();
        assert_abs_diff_eq!(s[2].m, 0.4);
        assert_abs_diff_eq!(s[0].m, 0.4);
    }

    #[test]
    fn parallel_edges_are_neighbors_but_not_triangles() {
        let mut inst = single_edge();
        inst.edges.push(edge(1, 1, 0, unit_menu()));
        let s = instance_edge_stats(&inst, &[0.3, 0.6]).unwrap();
        assert_eq!(s[0].neighbors, vec![1]);
        assert_abs_diff_eq!(s[0].d, 0.6);
        assert_eq!(s[0].m, 0.0);
    }

    #[test]
    fn family_examples() {
        let g = generate_family(&Family::TightPath3 { n: 100 }).unwrap();
        let x = g.x.unwrap();
        assert_abs_diff_eq!(x[0], 0.99, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(x[2], 0.99, epsilon = 1e-15);
        assert_eq!(g.instance.vertices.len(), 4);

        let d1 = generate_family(&Family::GreedyCounterexampleD1 { eps: 0.01 }).unwrap();
        assert_eq!(d1.instance.edges.len(), 1);
        let menu = &d1.instance.edges[0].menu;
        assert_eq!((menu[0].price, menu[0].prob), (1.0, 1.0));
        assert_eq!((menu[1].price, menu[1].prob), (2.0, 0.01));

        let star = generate_family(&Family::Star { k: 5 }).unwrap();
        assert_eq!(star.instance.edges.len(), 5);
        assert!(star.x.as_ref().unwrap().iter().all(|&v| v == 0.2));
        assert!(check_polytope(&star.instance, star.x.as_ref().unwrap()).unwrap().feasible);

        let d2 = generate_family(&Family::GreedyCounterexampleD2 { base: 10.0, k: 3, eps: 0.01 }).unwrap();
        let m: Vec<_> = d2.instance.edges.iter().map(|e| e.menu[0]).collect();
        assert_eq!(m[0].price, 1.01);
        assert_eq!(m[0].prob, 1.0);
        assert_abs_diff_eq!(m[3].price, 1000.0);
        assert_abs_diff_eq!(m[3].prob, 1e-3);

        let hard = generate_family(&Family::SingleEdgeHard { k: 10.0, grid: (0..9).map(f64::from).collect() }).unwrap();
        let menu = &hard.instance.edges[0].menu;
        assert_eq!(menu.len(), 9);
        assert_abs_diff_eq!(menu[8].prob, 0.5);
        assert_abs_diff_eq!(menu[0].prob, 0.1);
    }

    #[test]
    fn nonsensical_parameters_are_rejected() {
        for f in [
            Family::TightPath3 { n: 1 },
            Family::Star { k: 0 },
            Family::RandomGeneral { n: 1, density: 0.5, seed: 0 },
            Family::RandomGeneral { n: 5, density: 0.0, seed: 0 },
            Family::RandomBipartite { offline: 3, online: 3, density: 1.5, seed: 0 },
            Family::GreedyCounterexampleD1 { eps: 0.0 },
            Family::SingleEdgeHard { k: 10.0, grid: vec![9.5] },
        ] {
            assert!(matches!(generate_family(&f), Err(Error::Input(_))), "{f:?}");
        }
    }

    #[test]
    fn random_generators_are_seed_deterministic() {
        let f = Family::RandomGeneral { n: 7, density: 0.5, seed: 11 };
        assert_eq!(generate_family(&f).unwrap(), generate_family(&f).unwrap());
        let g = Family::RandomGeneral { n: 7, density: 0.5, seed: 12 };
        assert_ne!(generate_family(&f).unwrap(), generate_family(&g).unwrap());
    }
}
