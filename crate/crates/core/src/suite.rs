//! The fixed generator suite and the acceptance battery run over it.

use std::time::Instant;

use crate::attenuation::AttenuationSpec;
use crate::bounds::{edge_bounds, five_var_minimize, verify_facts, Setting};
use crate::error::Result;
use crate::graph::{generate_family, instance_edge_stats, Edge, Family, MenuEntry, Mode, Patience, PricingInstance, Side, Vertex};
use crate::lp::{build_lp_pricing, solve_lp, Objective};
use crate::rng::{CounterRng, Purpose};
use crate::simulate::{
    exact_trivial_oracle, greedy_baseline, monte_carlo, optimal_policy_dp, GreedyRule, RoOcrs, SequentialPricing, SimulationReport, StochasticOcrs,
    TrialEngine, VertexArrival, DP_OPTION_LIMIT,
};

/// Smallest acceptance probability drawn for the patience variants.
const P_LO: f64 = 0.3;

#[derive(Clone, Debug)]
pub struct SuiteInstance {
    pub name: String,
    pub instance: PricingInstance,
    pub x: Vec<f64>,
}

impl SuiteInstance {
    pub fn is_bipartite(&self) -> bool {
        self.instance.mode.is_bipartite()
    }
}

fn from_family(name: &str, f: Family) -> SuiteInstance {
    let g = generate_family(&f).expect("suite families are valid");
    SuiteInstance {
        name: name.to_string(),
        instance: g.instance,
        x: g.x.expect("OCRS families carry x"),
    }
}

fn hand_made(name: &str, mode: Mode, sides: &[Side], pairs: &[(usize, usize)], x: &[f64]) -> SuiteInstance {
    let vertices = sides.iter().enumerate().map(|(i, &s)| Vertex::new(i as u64, s)).collect();
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| Edge {
            id: i as u64,
            u: u as u64,
            v: v as u64,
            menu: vec![MenuEntry::new(0.0, 1.0)],
        })
        .collect();
    SuiteInstance {
        name: name.to_string(),
        instance: PricingInstance { mode, vertices, edges },
        x: x.to_vec(),
    }
}

/// The fixed 20-instance suite: paths, stars, triangles, random bipartite and
/// random general graphs, each with its fractional point.
pub fn standard_suite() -> Vec<SuiteInstance> {
    use Side::{Offline as L, Online as R};
    let mut s = vec![
        from_family("tight_path3_100", Family::TightPath3 { n: 100 }),
        from_family("tight_path3_10", Family::TightPath3 { n: 10 }),
        hand_made("path5", Mode::Bipartite, &[L, R, L, R, L], &[(0, 1), (1, 2), (2, 3), (3, 4)], &[0.3, 0.7, 0.3, 0.7]),
        from_family("star2", Family::Star { k: 2 }),
        from_family("star3", Family::Star { k: 3 }),
        from_family("star5", Family::Star { k: 5 }),
        from_family("star8", Family::Star { k: 8 }),
        from_family("triangle", Family::Triangle),
        hand_made("k4", Mode::General, &[Side::None; 4], &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], &[1.0 / 3.0; 6]),
    ];
    for (i, (l, r, d)) in [(3, 4, 0.7), (4, 5, 0.6), (5, 5, 0.5), (4, 7, 0.5), (6, 6, 0.4), (3, 8, 0.6)].into_iter().enumerate() {
        s.push(from_family(&format!("bipartite_{l}x{r}_s{}", i + 1), Family::RandomBipartite { offline: l, online: r, density: d, seed: i as u64 + 1 }));
    }
    for (i, (n, d)) in [(5, 0.7), (6, 0.6), (7, 0.5), (8, 0.45), (9, 0.4)].into_iter().enumerate() {
        s.push(from_family(&format!("general_{n}_s{}", i + 1), Family::RandomGeneral { n, density: d, seed: i as u64 + 11 }));
    }
    s
}

/// Stochastic-scheme inputs derived from a suite instance.
#[derive(Clone, Debug)]
pub struct PatienceInputs {
    pub instance: PricingInstance,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
}

/// Draws `p_e` uniformly in `[max(x_e, P_LO), 1]`, sets `y = x / p` and gives
/// each vertex patience `ceil(sum y)`. With `one_sided`, offline vertices keep
/// unbounded patience (bipartite instances only).
pub fn patience_inputs(s: &SuiteInstance, one_sided: bool, seed: u64) -> PatienceInputs {
    let rng = CounterRng::new(seed).trial(0);
    let mut inst = s.instance.clone();
    let p: Vec<f64> = s
        .x
        .iter()
        .enumerate()
        .map(|(e, &x)| {
            let lo = x.max(P_LO);
            lo + (1.0 - lo) * rng.uniform(e as u64, Purpose::Auxiliary)
        })
        .collect();
    let y: Vec<f64> = s.x.iter().zip(&p).map(|(x, p)| (x / p).min(1.0)).collect();
    let index: std::collections::HashMap<u64, usize> = inst.vertices.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
    let mut load = vec![0.0; inst.vertices.len()];
    for (e, edge) in inst.edges.iter().enumerate() {
        load[index[&edge.u]] += y[e];
        load[index[&edge.v]] += y[e];
    }
    for (v, l) in inst.vertices.iter_mut().zip(&load) {
        v.patience = if one_sided && v.side == Side::Offline {
            Patience::Unbounded
        } else {
            Patience::Limited(((l - 1e-9).ceil() as u32).max(1))
        };
    }
    if one_sided {
        inst.mode = Mode::BipartiteOneSidedPatience;
    }
    PatienceInputs { instance: inst, y, p }
}

#[derive(Clone, Copy, Debug)]
pub struct BatteryConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 42,
            workers: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub detail: Vec<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} ({}, {:.1}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds
        )
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "facts battery"),
    (2, "bound certificates"),
    (3, "tightness on tight_path3"),
    (4, "star optimality"),
    (5, "balancedness floors"),
    (6, "oracle equivalence"),
    (7, "LP dominance and end-to-end revenue"),
    (8, "greedy separations"),
    (9, "R0/R1 decomposition"),
];

/// Runs shared across criteria 5 and 9.
#[derive(Default)]
struct Cache {
    a2: Option<Vec<SimulationReport>>,
    patience: Option<Vec<(PatienceInputs, SimulationReport)>>,
    one_sided: Option<Vec<(usize, PatienceInputs, SimulationReport)>>,
}

struct Battery {
    cfg: BatteryConfig,
    suite: Vec<SuiteInstance>,
    cache: Cache,
}

/// Lower end of a conditional ratio estimate with `k` half-widths.
fn worst_edge(r: &SimulationReport, k: f64) -> (f64, u64) {
    r.edges
        .iter()
        .filter(|e| e.x_e > 0.0)
        .map(|e| (e.cond_ratio + k * e.cond_ratio_half, e.edge_id))
        .fold((f64::INFINITY, 0), |b, c| if c.0 < b.0 { c } else { b })
}

impl Battery {
    fn mc(&self, engine: &dyn TrialEngine) -> Result<SimulationReport> {
        monte_carlo(engine, self.cfg.trials, self.cfg.seed, self.cfg.workers)
    }

    fn a2_runs(&mut self) -> Result<&[SimulationReport]> {
        if self.cache.a2.is_none() {
            let spec = AttenuationSpec::a2(0.171)?;
            let mut v = Vec::new();
            for s in &self.suite {
                v.push(self.mc(&RoOcrs::new(&s.instance, &s.x, &spec)?)?);
            }
            self.cache.a2 = Some(v);
        }
        Ok(self.cache.a2.as_deref().unwrap())
    }

    fn patience_runs(&mut self) -> Result<&[(PatienceInputs, SimulationReport)]> {
        if self.cache.patience.is_none() {
            let spec = AttenuationSpec::a2(Setting::PatienceGeneral.default_alpha())?;
            let mut v = Vec::new();
            for (i, s) in self.suite.iter().enumerate() {
                let pi = patience_inputs(s, false, self.cfg.seed ^ i as u64);
                let r = self.mc(&StochasticOcrs::new(&pi.instance, &pi.y, &pi.p, &spec)?)?;
                v.push((pi, r));
            }
            self.cache.patience = Some(v);
        }
        Ok(self.cache.patience.as_deref().unwrap())
    }

    fn one_sided_runs(&mut self) -> Result<&[(usize, PatienceInputs, SimulationReport)]> {
        if self.cache.one_sided.is_none() {
            let spec = AttenuationSpec::a2(Setting::PatienceOneSided.default_alpha())?;
            let mut v = Vec::new();
            for (i, s) in self.suite.iter().enumerate().filter(|(_, s)| s.is_bipartite()) {
                let pi = patience_inputs(s, true, self.cfg.seed ^ i as u64);
                let r = self.mc(&StochasticOcrs::new(&pi.instance, &pi.y, &pi.p, &spec)?)?;
                v.push((i, pi, r));
            }
            self.cache.one_sided = Some(v);
        }
        Ok(self.cache.one_sided.as_deref().unwrap())
    }

    fn run(&mut self, id: u8) -> Result<(bool, Vec<String>)> {
        match id {
            1 => Ok(self.facts()),
            2 => self.certificates(),
            3 => self.tightness(),
            4 => self.stars(),
            5 => self.floors(),
            6 => self.oracle(),
            7 => self.lp_dominance(),
            8 => self.greedy(),
            9 => self.decomposition(),
            _ => crate::error::input(format!("unknown criterion {id}")),
        }
    }

    fn facts(&self) -> (bool, Vec<String>) {
        let rows = verify_facts();
        let detail = rows
            .iter()
            .map(|r| format!("{} {} margin={:.3e} {}", if r.holds { "ok  " } else { "FAIL" }, r.id, r.margin, r.detail))
            .collect();
        (rows.iter().all(|r| r.holds), detail)
    }

    fn certificates(&self) -> Result<(bool, Vec<String>)> {
        let mut ok = true;
        let mut d = Vec::new();
        for s in Setting::ALL {
            let c = five_var_minimize(s, s.default_alpha(), 81, 3)?;
            let pass = (c.minimum - s.claimed()).abs() <= 0.002;
            ok &= pass;
            d.push(format!(
                "{:?} alpha={} min={:.6} claimed={} at x={:.4} d={:.4} dbig={:.4} s={:.4} m={:.4}",
                s, c.alpha, c.minimum, s.claimed(), c.point.x, c.point.d, c.point.dbig, c.point.s, c.point.m
            ));
        }
        Ok((ok, d))
    }

    fn tightness(&self) -> Result<(bool, Vec<String>)> {
        let s = &self.suite[0];
        let r = self.mc(&RoOcrs::new(&s.instance, &s.x, &AttenuationSpec::a1())?)?;
        let b = &r.edges[1];
        let target = crate::bounds::h2();
        let ok = (b.cond_ratio - target).abs() <= 0.006;
        Ok((ok, vec![format!("middle edge ratio {:.5} +- {:.5} (raw {:.5}), target {:.5} +- 0.006", b.cond_ratio, b.cond_ratio_half, b.ratio, target)]))
    }

    fn stars(&self) -> Result<(bool, Vec<String>)> {
        let floor = 1.0 - (-1.0f64).exp() - 0.006;
        let mut ok = true;
        let mut d = Vec::new();
        for s in self.suite.iter().filter(|s| s.name.starts_with("star")) {
            let r = self.mc(&RoOcrs::new(&s.instance, &s.x, &AttenuationSpec::a1())?)?;
            let (w, _) = worst_edge(&r, 0.0);
            ok &= w >= floor;
            d.push(format!("{}: min ratio {:.5} (floor {:.5})", s.name, w, floor));
        }
        Ok((ok, d))
    }

    fn floors(&mut self) -> Result<(bool, Vec<String>)> {
        let mut ok = true;
        let mut d = Vec::new();
        let mut check = |label: &str, name: &str, r: &SimulationReport, floor: f64| {
            let (w, e) = worst_edge(r, 3.0);
            let pass = w >= floor;
            ok &= pass;
            d.push(format!(
                "{} {label} {name}: ratio + 3 CI = {w:.5} at edge {e} (floor {floor}, point estimate {:.5})",
                if pass { "ok  " } else { "FAIL" },
                r.min_cond_ratio
            ));
        };
        let suite = self.suite.clone();
        for (s, r) in suite.iter().zip(self.a2_runs()?.to_vec()) {
            check("a2", &s.name, &r, 0.45);
            if s.is_bipartite() {
                check("a2 bipartite", &s.name, &r, 0.456);
            }
        }
        for (s, (_, r)) in suite.iter().zip(self.patience_runs()?.to_vec()) {
            check("patience", &s.name, &r, 0.395);
        }
        for (i, _, r) in self.one_sided_runs()?.to_vec() {
            check("one-sided", &suite[i].name, &r, 0.426);
        }
        for s in suite.iter().filter(|s| s.is_bipartite()) {
            let r = self.mc(&VertexArrival::new(&s.instance, &s.x)?)?;
            check("vertex", &s.name, &r, 0.399);
        }
        for s in &suite {
            let r = self.mc(&RoOcrs::new(&s.instance, &s.x, &AttenuationSpec::trivial())?)?;
            check("trivial", &s.name, &r, 1.0 / 3.0);
        }
        Ok((ok, d))
    }

    fn oracle(&self) -> Result<(bool, Vec<String>)> {
        let mut ok = true;
        let mut d = Vec::new();
        for s in self.suite.iter().filter(|s| s.instance.edges.len() <= 6) {
            let exact = exact_trivial_oracle(&s.instance, &s.x)?;
            let r = self.mc(&RoOcrs::new(&s.instance, &s.x, &AttenuationSpec::trivial())?)?;
            let mut worst: f64 = 0.0;
            for (e, rep) in r.edges.iter().enumerate() {
                let half = 0.5 * (rep.ci_hi - rep.ci_lo);
                let z = if half > 0.0 { (rep.freq - exact[e]).abs() / half } else if rep.freq == exact[e] { 0.0 } else { f64::INFINITY };
                worst = worst.max(z);
            }
            ok &= worst <= 4.0;
            d.push(format!("{}: worst |mc - exact| = {:.2} half-widths", s.name, worst));
        }
        Ok((ok, d))
    }

    fn lp_dominance(&self) -> Result<(bool, Vec<String>)> {
        let mut ok = true;
        let mut d = Vec::new();
        for (name, inst) in pricing_suite() {
            let objective = if inst.edges.iter().all(|e| e.menu.iter().all(|m| m.coef.is_some())) {
                Objective::Custom
            } else {
                Objective::Revenue
            };
            let sol = solve_lp(&build_lp_pricing(&inst, objective)?)?;
            let dp = optimal_policy_dp(&inst, objective)?;
            let dominates = sol.objective >= dp - 1e-8;
            ok &= dominates;
            let mut line = format!("{} {name}: LP {:.6} DP {:.6}", if dominates { "ok  " } else { "FAIL" }, sol.objective, dp);
            if inst.vertices.iter().all(|v| v.patience == Patience::Unbounded) {
                let eng = SequentialPricing::new(&inst, &sol.point, &AttenuationSpec::a2(0.171)?, objective)?;
                let r = self.mc(&eng)?;
                let pass = r.revenue_cond_mean + 3.0 * r.revenue_cond_half >= 0.45 * sol.objective;
                ok &= pass;
                line.push_str(&format!(
                    "; revenue {:.6} +- {:.6} vs 0.45 LP = {:.6} {}",
                    r.revenue_cond_mean,
                    r.revenue_cond_half,
                    0.45 * sol.objective,
                    if pass { "ok" } else { "FAIL" }
                ));
            }
            d.push(line);
        }
        Ok((ok, d))
    }

    fn greedy(&self) -> Result<(bool, Vec<String>)> {
        let mut d = Vec::new();
        let d1 = generate_family(&Family::GreedyCounterexampleD1 { eps: 0.01 })?.instance;
        let g = greedy_baseline(&d1, GreedyRule::ByWeight, Objective::Custom)?;
        let opt = optimal_policy_dp(&d1, Objective::Custom)?;
        let mut ok = g == 0.02 && (opt - 1.0).abs() < 1e-12;
        d.push(format!("d1(0.01): greedy_by_weight {g}, DP {opt}"));
        let mut ratios = Vec::new();
        for k in [3u32, 6] {
            let d2 = generate_family(&Family::GreedyCounterexampleD2 { base: 10.0, k, eps: 0.01 })?.instance;
            let g = greedy_baseline(&d2, GreedyRule::ByExpectedWeight, Objective::Custom)?;
            let h = greedy_baseline(&d2, GreedyRule::ByWeight, Objective::Custom)?;
            ok &= (g - 1.01).abs() < 1e-12;
            if k == 6 {
                ok &= h >= 5.0;
            }
            ratios.push(h / g);
            d.push(format!("d2(10, {k}): greedy_by_expected_weight {g:.6}, high-to-low {h:.6}, ratio {:.4}", h / g));
        }
        ok &= ratios[1] > ratios[0];
        Ok((ok, d))
    }

    fn decomposition(&mut self) -> Result<(bool, Vec<String>)> {
        let mut ok = true;
        let mut d = Vec::new();
        let mut compare = |label: &str, name: &str, r: &SimulationReport, bounds: &[(f64, f64)]| {
            let mut worst = (f64::INFINITY, 0u64, "");
            for (rep, &(b0, b1)) in r.edges.iter().zip(bounds) {
                if rep.x_e <= 0.0 {
                    continue;
                }
                let s0 = rep.cond_r0 + 3.0 * rep.cond_r0_half - b0;
                let s1 = rep.cond_r1 + 3.0 * rep.cond_r1_half - b1;
                if s0 < worst.0 {
                    worst = (s0, rep.edge_id, "R0");
                }
                if s1 < worst.0 {
                    worst = (s1, rep.edge_id, "R1");
                }
            }
            let pass = worst.0 >= 0.0;
            ok &= pass;
            d.push(format!("{} {label} {name}: worst slack {:.3e} ({} at edge {})", if pass { "ok  " } else { "FAIL" }, worst.0, worst.2, worst.1));
        };
        let suite = self.suite.clone();
        for (s, r) in suite.iter().zip(self.a2_runs()?.to_vec()) {
            let stats = instance_edge_stats(&s.instance, &s.x)?;
            compare("a2", &s.name, &r, &edge_bounds(Setting::General, 0.171, &stats, &s.x));
        }
        for (s, (pi, r)) in suite.iter().zip(self.patience_runs()?.to_vec()) {
            let x: Vec<f64> = pi.y.iter().zip(&pi.p).map(|(y, p)| y * p).collect();
            let stats = instance_edge_stats(&pi.instance, &x)?;
            compare("patience", &s.name, &r, &edge_bounds(Setting::PatienceGeneral, Setting::PatienceGeneral.default_alpha(), &stats, &x));
        }
        for (i, pi, r) in self.one_sided_runs()?.to_vec() {
            let x: Vec<f64> = pi.y.iter().zip(&pi.p).map(|(y, p)| y * p).collect();
            let stats = instance_edge_stats(&pi.instance, &x)?;
            compare("one-sided", &suite[i].name, &r, &edge_bounds(Setting::PatienceOneSided, Setting::PatienceOneSided.default_alpha(), &stats, &x));
        }
        Ok((ok, d))
    }
}

/// Small priced instances the exact DP can handle, with patience variants.
pub fn pricing_suite() -> Vec<(String, PricingInstance)> {
    let mut v = Vec::new();
    let mut push = |name: String, inst: PricingInstance| {
        let options: usize = inst.edges.iter().map(|e| e.menu.len()).sum();
        if !inst.edges.is_empty() && options <= DP_OPTION_LIMIT {
            v.push((name, inst));
        }
    };
    for seed in 1..=4u64 {
        let b = generate_family(&Family::RandomBipartite { offline: 2, online: 3, density: 0.7, seed }).expect("valid family").instance;
        let mut one = b.clone();
        for vx in one.vertices.iter_mut().filter(|v| v.side == Side::Online) {
            vx.patience = Patience::Limited(1);
        }
        one.mode = Mode::BipartiteOneSidedPatience;
        push(format!("bipartite_2x3_s{seed}"), b);
        push(format!("bipartite_2x3_s{seed}_patience1"), one);
        let g = generate_family(&Family::RandomGeneral { n: 4, density: 0.6, seed: seed + 20 }).expect("valid family").instance;
        let mut two = g.clone();
        for vx in two.vertices.iter_mut() {
            vx.patience = Patience::Limited(1);
        }
        push(format!("general_4_s{}", seed + 20), g);
        push(format!("general_4_s{}_patience1", seed + 20), two);
    }
    let fam = |f: Family| generate_family(&f).expect("valid family").instance;
    push("d1".into(), fam(Family::GreedyCounterexampleD1 { eps: 0.01 }));
    push("d2_k3".into(), fam(Family::GreedyCounterexampleD2 { base: 10.0, k: 3, eps: 0.01 }));
    push("single_edge_hard_10".into(), fam(Family::SingleEdgeHard { k: 10.0, grid: (0..9).map(f64::from).collect() }));
    v
}

/// Runs the listed criteria (all when `ids` is empty) in order.
pub fn run_battery(cfg: BatteryConfig, ids: &[u8]) -> Result<Vec<CriterionResult>> {
    let mut b = Battery {
        cfg,
        suite: standard_suite(),
        cache: Cache::default(),
    };
    let mut out = Vec::new();
    for (id, name) in CRITERIA {
        if !ids.is_empty() && !ids.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let (passed, detail) = b.run(id)?;
        out.push(CriterionResult {
            id,
            name,
            passed,
            seconds: t.elapsed().as_secs_f64(),
            detail,
        });
    }
    Ok(out)
}
