//! LP-Pricing: construction, solution, marginals and the weight reductions.

pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::graph::{validate_instance, PricingInstance, Topology, POLYTOPE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// `p_ew (v_j - w)`, where the job value of an edge is the sum of its endpoint values.
    Revenue,
    /// `p_ew c_ew`; `c_ew` is the reward collected when the offer is accepted.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// `sum_w y_ew <= 1`
    Offer { edge: usize },
    /// `sum_{e ∋ v} sum_w y_ew p_ew <= 1`
    Accept { vertex: usize },
    /// `sum_{e ∋ v} sum_w y_ew <= l_v`, finite patience only
    Patience { vertex: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Column of the LP: menu entry `entry` of edge `edge` (positions, not ids).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Var {
    pub edge: usize,
    pub entry: usize,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub vars: Vec<Var>,
    pub menu_sizes: Vec<usize>,
}

/// LP solution `y_ew` indexed `[edge][menu entry]`, with `x_e = sum_w y_ew p_ew`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalPoint {
    pub y: Vec<Vec<f64>>,
    pub x: Vec<f64>,
}

impl FractionalPoint {
    pub fn zero(inst: &PricingInstance) -> Self {
        Self {
            y: inst.edges.iter().map(|e| vec![0.0; e.menu.len()]).collect(),
            x: vec![0.0; inst.edges.len()],
        }
    }

    /// Builds the point and its marginals; `y` must match the menu shapes.
    pub fn from_y(inst: &PricingInstance, y: Vec<Vec<f64>>) -> Result<Self> {
        if y.len() != inst.edges.len() {
            return input(format!("y has {} edges, instance has {}", y.len(), inst.edges.len()));
        }
        for (e, (ye, edge)) in y.iter().zip(&inst.edges).enumerate() {
            if ye.len() != edge.menu.len() {
                return input(format!("edge {}: y has {} entries for a menu of {}", inst.edges[e].id, ye.len(), edge.menu.len()));
            }
            if ye.iter().any(|v| !v.is_finite()) {
                return input(format!("edge {}: non-finite y", edge.id));
            }
        }
        let x = marginals(inst, &y).x;
        Ok(Self { y, x })
    }

    pub fn support(&self, e: usize) -> usize {
        self.y[e].iter().filter(|&&v| v > POLYTOPE_TOL).count()
    }

    /// Every violated LP-Pricing constraint at tolerance `tol`, as readable strings.
    pub fn violations(&self, inst: &PricingInstance, tol: f64) -> Result<Vec<String>> {
        let topo = Topology::new(inst)?;
        let mut out = Vec::new();
        for (e, ye) in self.y.iter().enumerate() {
            let id = inst.edges[e].id;
            if let Some(v) = ye.iter().find(|&&v| v < -tol) {
                out.push(format!("edge {id}: negative entry {v}"));
            }
            let total: f64 = ye.iter().sum();
            if total > 1.0 + tol {
                out.push(format!("edge {id}: offers sum to {total}"));
            }
        }
        for v in 0..topo.num_vertices() {
            let id = inst.vertices[v].id;
            let load: f64 = topo.incident(v).iter().map(|&e| self.x[e]).sum();
            if load > 1.0 + tol {
                out.push(format!("vertex {id}: acceptance load {load}"));
            }
            if let Some(l) = inst.vertices[v].patience.limit() {
                let offers: f64 = topo.incident(v).iter().map(|&e| self.y[e].iter().sum::<f64>()).sum();
                if offers > l as f64 + tol {
                    out.push(format!("vertex {id}: {offers} offers against patience {l}"));
                }
            }
        }
        Ok(out)
    }

    pub fn check(&self, inst: &PricingInstance) -> Result<()> {
        let v = self.violations(inst, POLYTOPE_TOL)?;
        if v.is_empty() {
            Ok(())
        } else {
            input(v.join("; "))
        }
    }
}

/// Expected reward of one offer of menu entry `entry` on edge `e`.
pub fn coefficient(inst: &PricingInstance, e: usize, entry: usize, objective: Objective) -> Result<f64> {
    let edge = &inst.edges[e];
    let m = &edge.menu[entry];
    match objective {
        Objective::Revenue => {
            let value: f64 = inst
                .vertices
                .iter()
                .filter(|v| v.id == edge.u || v.id == edge.v)
                .map(|v| v.value)
                .sum();
            Ok(m.prob * (value - m.price))
        }
        Objective::Custom => match m.coef {
            Some(c) => Ok(m.prob * c),
            None => input(format!("edge {} menu entry {entry} has no objective coefficient", edge.id)),
        },
    }
}

fn coefficients(inst: &PricingInstance, objective: Objective) -> Result<Vec<Vec<f64>>> {
    (0..inst.edges.len())
        .map(|e| (0..inst.edges[e].menu.len()).map(|w| coefficient(inst, e, w, objective)).collect())
        .collect()
}

pub fn objective_value(inst: &PricingInstance, point: &FractionalPoint, objective: Objective) -> Result<f64> {
    let c = coefficients(inst, objective)?;
    Ok(point
        .y
        .iter()
        .zip(&c)
        .flat_map(|(y, c)| y.iter().zip(c).map(|(a, b)| a * b))
        .sum())
}

pub fn build_lp_pricing(inst: &PricingInstance, objective: Objective) -> Result<LinearProgram> {
    let violations = validate_instance(inst);
    if let Some(v) = violations.first() {
        return input(format!("invalid instance ({} violations), first: {v}", violations.len()));
    }
    let topo = Topology::new(inst)?;
    let coef = coefficients(inst, objective)?;

    let mut vars = Vec::new();
    let mut first = Vec::with_capacity(inst.edges.len());
    for (e, edge) in inst.edges.iter().enumerate() {
        first.push(vars.len());
        for (w, m) in edge.menu.iter().enumerate() {
            vars.push(Var { edge: e, entry: w, prob: m.prob });
        }
    }
    let cols = |e: usize| first[e]..first[e] + inst.edges[e].menu.len();

    let mut rows = Vec::new();
    for e in 0..inst.edges.len() {
        rows.push(Row {
            kind: RowKind::Offer { edge: e },
            coeffs: cols(e).map(|j| (j, 1.0)).collect(),
            rhs: 1.0,
        });
    }
    for v in 0..topo.num_vertices() {
        rows.push(Row {
            kind: RowKind::Accept { vertex: v },
            coeffs: topo
                .incident(v)
                .iter()
                .flat_map(|&e| cols(e))
                .map(|j| (j, vars[j].prob))
                .collect(),
            rhs: 1.0,
        });
    }
    for v in 0..topo.num_vertices() {
        if let Some(l) = inst.vertices[v].patience.limit() {
            rows.push(Row {
                kind: RowKind::Patience { vertex: v },
                coeffs: topo.incident(v).iter().flat_map(|&e| cols(e)).map(|j| (j, 1.0)).collect(),
                rhs: l as f64,
            });
        }
    }
    Ok(LinearProgram {
        objective: coef.into_iter().flatten().collect(),
        rows,
        vars,
        menu_sizes: inst.edges.iter().map(|e| e.menu.len()).collect(),
    })
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub point: FractionalPoint,
    pub objective: f64,
    pub iterations: usize,
    pub reduced_costs: Vec<f64>,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    let rows: Vec<Vec<(usize, f64)>> = lp.rows.iter().map(|r| r.coeffs.clone()).collect();
    let rhs: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
    let sol = simplex::maximize(&lp.objective, &rows, &rhs)?;

    let mut y: Vec<Vec<f64>> = lp.menu_sizes.iter().map(|&k| vec![0.0; k]).collect();
    let mut x = vec![0.0; lp.menu_sizes.len()];
    for (j, var) in lp.vars.iter().enumerate() {
        y[var.edge][var.entry] = sol.y[j];
        x[var.edge] += sol.y[j] * var.prob;
    }
    // the basis should already satisfy every row; anything else is a solver bug
    for r in &lp.rows {
        let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * sol.y[j]).sum();
        if lhs > r.rhs + POLYTOPE_TOL {
            return Err(Error::Internal(format!("{:?} violated: {lhs} > {}", r.kind, r.rhs)));
        }
    }
    Ok(LpSolution {
        point: FractionalPoint { y, x },
        objective: sol.objective,
        iterations: sol.iterations,
        reduced_costs: sol.reduced_costs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    pub x: Vec<f64>,
    pub y_e: Vec<f64>,
    /// Zero when `y_e = 0`.
    pub p_e: Vec<f64>,
}

pub fn marginals(inst: &PricingInstance, y: &[Vec<f64>]) -> Marginals {
    let mut out = Marginals {
        x: Vec::with_capacity(y.len()),
        y_e: Vec::with_capacity(y.len()),
        p_e: Vec::with_capacity(y.len()),
    };
    for (ye, edge) in y.iter().zip(&inst.edges) {
        let total: f64 = ye.iter().sum();
        let x: f64 = ye.iter().zip(&edge.menu).map(|(a, m)| a * m.prob).sum();
        out.x.push(x);
        out.y_e.push(total);
        out.p_e.push(if total > 0.0 { x / total } else { 0.0 });
    }
    out
}

/// Replaces each edge's offer distribution by an extreme point of
/// `{y' >= 0 : sum y' <= y_e, sum y' p <= x_e}` maximizing the edge's objective,
/// which has at most two nonzero entries. Edges with support <= 2 are kept.
pub fn two_weight_reduction(inst: &PricingInstance, point: &FractionalPoint, objective: Objective) -> Result<FractionalPoint> {
    let coef = coefficients(inst, objective)?;
    let mut y = point.y.clone();
    for (e, edge) in inst.edges.iter().enumerate() {
        if point.support(e) <= 2 {
            continue;
        }
        let total: f64 = point.y[e].iter().sum::<f64>().max(0.0);
        let x = point.x[e].max(0.0);
        let probs: Vec<(usize, f64)> = edge.menu.iter().enumerate().map(|(w, m)| (w, m.prob)).collect();
        let ones: Vec<(usize, f64)> = (0..edge.menu.len()).map(|w| (w, 1.0)).collect();
        let sol = simplex::maximize(&coef[e], &[ones, probs], &[total, x])?;
        let before: f64 = point.y[e].iter().zip(&coef[e]).map(|(a, b)| a * b).sum();
        if sol.objective >= before - 1e-12 {
            y[e] = sol.y;
        }
    }
    FractionalPoint::from_y(inst, y)
}

/// Keeps, per edge, the single entry with the largest contribution `y_ew p_ew c_ew`.
/// Edges whose best contribution is not positive are dropped entirely.
/// Retains at least half of the objective when every edge has support <= 2.
pub fn single_weight_selection(inst: &PricingInstance, point: &FractionalPoint, objective: Objective) -> Result<FractionalPoint> {
    let coef = coefficients(inst, objective)?;
    let y = point
        .y
        .iter()
        .zip(&coef)
        .map(|(ye, ce)| {
            let mut best: Option<(usize, f64)> = None;
            for (w, (a, c)) in ye.iter().zip(ce).enumerate() {
                let v = a * c;
                if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((w, v));
                }
            }
            let mut out = vec![0.0; ye.len()];
            if let Some((w, _)) = best {
                out[w] = ye[w];
            }
            out
        })
        .collect();
    FractionalPoint::from_y(inst, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_family, Edge, Family, MenuEntry, Mode, Patience, Side, Vertex};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn one_edge(value: f64, menu: Vec<MenuEntry>, patience: Patience) -> PricingInstance {
        let mut job = Vertex::new(1, Side::Online);
        job.value = value;
        job.patience = patience;
        PricingInstance {
            mode: Mode::Bipartite,
            vertices: vec![Vertex::new(0, Side::Offline), job],
            edges: vec![Edge { id: 0, u: 0, v: 1, menu }],
        }
    }

    /// Max of `c.y` over `{A y <= b, y >= 0}` by enumerating every basis.
    fn brute_force(c: &[f64], rows: &[Vec<(usize, f64)>], rhs: &[f64]) -> f64 {
        let n = c.len();
        let mut a: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; n];
                for &(j, v) in r {
                    d[j] += v;
                }
                d
            })
            .collect();
        let mut b = rhs.to_vec();
        for j in 0..n {
            let mut d = vec![0.0; n];
            d[j] = -1.0;
            a.push(d);
            b.push(0.0);
        }
        let total = a.len();
        let mut best = f64::NEG_INFINITY;
        let mut pick = vec![0usize; n];
        fn rec(k: usize, start: usize, total: usize, pick: &mut [usize], f: &mut dyn FnMut(&[usize])) {
            if k == pick.len() {
                f(pick);
                return;
            }
            for i in start..total {
                pick[k] = i;
                rec(k + 1, i + 1, total, pick, f);
            }
        }
        rec(0, 0, total, &mut pick, &mut |sel: &[usize]| {
            let mut m: Vec<Vec<f64>> = sel.iter().map(|&i| {
                let mut r = a[i].clone();
                r.push(b[i]);
                r
            }).collect();
            // gaussian elimination with partial pivoting
            for col in 0..n {
                let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
                if m[p][col].abs() < 1e-12 {
                    return;
                }
                m.swap(col, p);
                for i in 0..n {
                    if i != col {
                        let f = m[i][col] / m[col][col];
                        for k in col..=n {
                            m[i][k] -= f * m[col][k];
                        }
                    }
                }
            }
            let y: Vec<f64> = (0..n).map(|i| m[i][n] / m[i][i]).collect();
            let feasible = a.iter().zip(&b).all(|(r, &bi)| r.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9);
            if feasible {
                best = best.max(c.iter().zip(&y).map(|(p, q)| p * q).sum());
            }
        });
        best
    }

    #[test]
    fn single_edge_program() {
        let inst = one_edge(2.0, vec![MenuEntry::new(1.0, 1.0)], Patience::Limited(1));
        let lp = build_lp_pricing(&inst, Objective::Revenue).unwrap();
        assert_eq!(lp.objective, vec![1.0]);
        // offer row, two acceptance rows, one patience row
        assert_eq!(lp.rows.len(), 4);
        let sol = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(sol.objective, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.point.y[0][0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unbounded_patience_emits_no_row() {
        let inst = one_edge(2.0, vec![MenuEntry::new(1.0, 1.0)], Patience::Unbounded);
        let lp = build_lp_pricing(&inst, Objective::Revenue).unwrap();
        assert!(lp.rows.iter().all(|r| !matches!(r.kind, RowKind::Patience { .. })));
        assert_eq!(lp.rows.len(), 3);
    }

    #[test]
    fn d1_custom_coefficients() {
        let g = generate_family(&Family::GreedyCounterexampleD1 { eps: 0.01 }).unwrap();
        let lp = build_lp_pricing(&g.instance, Objective::Custom).unwrap();
        assert_abs_diff_eq!(lp.objective[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lp.objective[1], 0.02, epsilon = 1e-15);
        let sol = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(sol.objective, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn custom_objective_needs_coefficients() {
        let inst = one_edge(2.0, vec![MenuEntry::new(1.0, 1.0)], Patience::Unbounded);
        assert!(matches!(build_lp_pricing(&inst, Objective::Custom), Err(Error::Input(_))));
    }

    #[test]
    fn single_edge_hard_matches_enumeration() {
        let grid: Vec<f64> = (0..=8).map(f64::from).collect();
        let g = generate_family(&Family::SingleEdgeHard { k: 10.0, grid: grid.clone() }).unwrap();
        let sol = solve_lp(&build_lp_pricing(&g.instance, Objective::Revenue).unwrap()).unwrap();
        // every single price earns p (k - w) = 1; mixing cannot beat one probe
        let best = grid.iter().map(|w| (10.0 - w) / (10.0 - w)).fold(0.0, f64::max);
        assert_abs_diff_eq!(sol.objective, best, epsilon = 1e-8);
        sol.point.check(&g.instance).unwrap();
    }

    #[test]
    fn zero_value_jobs_give_zero() {
        let inst = one_edge(0.0, vec![MenuEntry::new(1.0, 1.0), MenuEntry::new(0.5, 0.3)], Patience::Unbounded);
        let sol = solve_lp(&build_lp_pricing(&inst, Objective::Revenue).unwrap()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.point.y[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_instance_is_rejected() {
        let inst = one_edge(2.0, vec![MenuEntry::new(1.0, 1.3)], Patience::Unbounded);
        assert!(build_lp_pricing(&inst, Objective::Revenue).is_err());
    }

    #[test]
    fn marginals_examples() {
        let inst = one_edge(2.0, vec![MenuEntry::new(1.0, 0.5)], Patience::Unbounded);
        let m = marginals(&inst, &[vec![0.6]]);
        assert_abs_diff_eq!(m.x[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(m.y_e[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(m.p_e[0], 0.5, epsilon = 1e-15);

        let inst = one_edge(2.0, vec![MenuEntry::new(1.0, 1.0), MenuEntry::new(2.0, 0.2)], Patience::Unbounded);
        let m = marginals(&inst, &[vec![0.5, 0.5]]);
        assert_abs_diff_eq!(m.x[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(m.y_e[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.p_e[0], 0.6, epsilon = 1e-15);

        let m = marginals(&inst, &[vec![0.0, 0.0]]);
        assert_eq!((m.x[0], m.y_e[0], m.p_e[0]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_support_is_unchanged_by_reduction() {
        let inst = one_edge(3.0, vec![MenuEntry::new(1.0, 0.9), MenuEntry::new(2.0, 0.5)], Patience::Unbounded);
        let p = FractionalPoint::from_y(&inst, vec![vec![0.0, 0.7]]).unwrap();
        assert_eq!(two_weight_reduction(&inst, &p, Objective::Revenue).unwrap(), p);
    }

    #[test]
    fn three_weights_shrink_to_two() {
        let menu = vec![MenuEntry::new(0.5, 0.9), MenuEntry::new(1.0, 0.6), MenuEntry::new(1.5, 0.3)];
        let inst = one_edge(2.0, menu, Patience::Unbounded);
        let p = FractionalPoint::from_y(&inst, vec![vec![0.3, 0.3, 0.3]]).unwrap();
        let r = two_weight_reduction(&inst, &p, Objective::Revenue).unwrap();
        assert!(r.support(0) <= 2);
        let before = objective_value(&inst, &p, Objective::Revenue).unwrap();
        let after = objective_value(&inst, &r, Objective::Revenue).unwrap();
        assert!(after >= before - 1e-8);
        assert!(r.x[0] <= p.x[0] + 1e-12);
    }

    #[test]
    fn selection_examples() {
        let menu = vec![MenuEntry::with_coef(1.0, 1.0, 0.7), MenuEntry::with_coef(2.0, 1.0, 0.3)];
        let inst = one_edge(0.0, menu, Patience::Unbounded);
        let p = FractionalPoint::from_y(&inst, vec![vec![0.5, 0.5]]).unwrap();
        let s = single_weight_selection(&inst, &p, Objective::Custom).unwrap();
        assert_eq!(s.y[0], vec![0.5, 0.0]);
        let ratio = objective_value(&inst, &s, Objective::Custom).unwrap() / objective_value(&inst, &p, Objective::Custom).unwrap();
        assert_abs_diff_eq!(ratio, 0.7, epsilon = 1e-12);

        let menu = vec![MenuEntry::with_coef(1.0, 1.0, 1.0), MenuEntry::with_coef(2.0, 1.0, 1.0)];
        let inst = one_edge(0.0, menu, Patience::Unbounded);
        let p = FractionalPoint::from_y(&inst, vec![vec![0.5, 0.5]]).unwrap();
        let s = single_weight_selection(&inst, &p, Objective::Custom).unwrap();
        let ratio = objective_value(&inst, &s, Objective::Custom).unwrap() / objective_value(&inst, &p, Objective::Custom).unwrap();
        assert_abs_diff_eq!(ratio, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn full_pipeline_keeps_half() {
        for seed in 0..8 {
            let g = generate_family(&Family::RandomBipartite { offline: 4, online: 4, density: 0.5, seed }).unwrap();
            let sol = solve_lp(&build_lp_pricing(&g.instance, Objective::Revenue).unwrap()).unwrap();
            let two = two_weight_reduction(&g.instance, &sol.point, Objective::Revenue).unwrap();
            let one = single_weight_selection(&g.instance, &two, Objective::Revenue).unwrap();
            let kept = objective_value(&g.instance, &one, Objective::Revenue).unwrap();
            assert!(kept >= 0.5 * sol.objective - 1e-9, "seed {seed}: {kept} vs {}", sol.objective);
            one.check(&g.instance).unwrap();
        }
    }

    fn star4_four_weights(seed: u64) -> PricingInstance {
        let g = generate_family(&Family::Star { k: 4 }).unwrap();
        let mut inst = g.instance;
        let rng = crate::rng::CounterRng::new(seed).trial(0);
        let mut seq = rng.sequence(crate::rng::Purpose::Auxiliary);
        for v in &mut inst.vertices {
            v.value = 1.0 + seq.next_f64();
        }
        for e in &mut inst.edges {
            e.menu = (0..4)
                .map(|_| MenuEntry::new(2.0 * seq.next_f64(), seq.next_f64()))
                .collect();
        }
        inst
    }

    /// Per-edge brute force of the two-row restricted program.
    fn edge_optimum(inst: &PricingInstance, p: &FractionalPoint, e: usize) -> f64 {
        let c: Vec<f64> = (0..inst.edges[e].menu.len()).map(|w| coefficient(inst, e, w, Objective::Revenue).unwrap()).collect();
        let ones = (0..c.len()).map(|w| (w, 1.0)).collect();
        let probs = inst.edges[e].menu.iter().enumerate().map(|(w, m)| (w, m.prob)).collect();
        brute_force(&c, &[ones, probs], &[p.y[e].iter().sum(), p.x[e]])
    }

    #[test]
    fn star4_reduction_matches_vertex_enumeration() {
        for seed in 0..20 {
            let inst = star4_four_weights(seed);
            let rng = crate::rng::CounterRng::new(seed).trial(1);
            let mut seq = rng.sequence(crate::rng::Purpose::Auxiliary);
            // random feasible y: each edge spreads at most 1/4 of the center's capacity
            let y: Vec<Vec<f64>> = (0..4).map(|_| (0..4).map(|_| 0.0625 * seq.next_f64()).collect()).collect();
            let p = FractionalPoint::from_y(&inst, y).unwrap();
            p.check(&inst).unwrap();
            let r = two_weight_reduction(&inst, &p, Objective::Revenue).unwrap();
            r.check(&inst).unwrap();
            for e in 0..4 {
                assert!(r.support(e) <= 2);
                let got: f64 = r.y[e].iter().enumerate().map(|(w, a)| a * coefficient(&inst, e, w, Objective::Revenue).unwrap()).sum();
                assert_abs_diff_eq!(got, edge_optimum(&inst, &p, e).max(0.0), epsilon = 1e-9);
                assert!(r.x[e] <= p.x[e] + 1e-12);
            }
            let before = objective_value(&inst, &p, Objective::Revenue).unwrap();
            let after = objective_value(&inst, &r, Objective::Revenue).unwrap();
            assert!(after >= before - 1e-8);
        }
    }

    fn random_instance(seed: u64, general: bool) -> PricingInstance {
        let fam = if general {
            Family::RandomGeneral { n: 4, density: 0.6, seed }
        } else {
            Family::RandomBipartite { offline: 2, online: 2, density: 0.7, seed }
        };
        let mut inst = generate_family(&fam).unwrap().instance;
        let rng = crate::rng::CounterRng::new(seed).trial(2);
        let mut seq = rng.sequence(crate::rng::Purpose::Auxiliary);
        for v in &mut inst.vertices {
            if seq.next_bool(0.5) {
                v.patience = Patience::Limited(1);
            }
        }
        inst
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn solutions_are_feasible_and_optimal(seed in 0u64..10_000, general in any::<bool>()) {
            let inst = random_instance(seed, general);
            let lp = build_lp_pricing(&inst, Objective::Revenue).unwrap();
            let sol = solve_lp(&lp).unwrap();
            sol.point.check(&inst).unwrap();
            // no improving pivot remains
            prop_assert!(sol.reduced_costs.iter().all(|&r| r <= simplex::PIVOT_TOL));
            if lp.vars.len() <= 8 {
                let rows: Vec<_> = lp.rows.iter().map(|r| r.coeffs.clone()).collect();
                let rhs: Vec<_> = lp.rows.iter().map(|r| r.rhs).collect();
                let best = brute_force(&lp.objective, &rows, &rhs);
                prop_assert!((sol.objective - best).abs() <= 1e-8 * best.abs().max(1.0));
            }
        }

        #[test]
        fn reductions_keep_objective(seed in 0u64..10_000) {
            let inst = random_instance(seed, seed % 2 == 0);
            let sol = solve_lp(&build_lp_pricing(&inst, Objective::Revenue).unwrap()).unwrap();
            let two = two_weight_reduction(&inst, &sol.point, Objective::Revenue).unwrap();
            let v2 = objective_value(&inst, &two, Objective::Revenue).unwrap();
            prop_assert!(v2 >= sol.objective - 1e-8);
            for e in 0..inst.edges.len() {
                prop_assert!(two.x[e] <= sol.point.x[e] + 1e-12);
            }
            let one = single_weight_selection(&inst, &two, Objective::Revenue).unwrap();
            prop_assert!(objective_value(&inst, &one, Objective::Revenue).unwrap() >= 0.5 * v2 - 1e-9);
        }
    }
}
