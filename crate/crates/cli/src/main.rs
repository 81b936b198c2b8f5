mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ocrs_core::attenuation::{AttenuationKind, AttenuationSpec};
use ocrs_core::bounds::{five_var_minimize, verify_facts, Setting};
use ocrs_core::graph::{generate_family, validate_instance, Family, PricingInstance};
use ocrs_core::lp::{build_lp_pricing, marginals, objective_value, single_weight_selection, solve_lp, two_weight_reduction, FractionalPoint, Objective};
use ocrs_core::simulate::{monte_carlo, RoOcrs, SequentialPricing, SimulationReport, StochasticOcrs, TrialEngine, VertexArrival};
use ocrs_core::suite::{run_battery, BatteryConfig};

use crate::io::{ensure, parse_list, point_entries, read_instance, read_point, write_json, write_report_csv, InstanceFile, Summary};

#[derive(Parser)]
#[command(name = "ocrs", version, about = "Contention resolution and sequential pricing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance file.
    Gen(GenArgs),
    /// Solve LP-Pricing and write the fractional point.
    Lp(LpArgs),
    /// Monte Carlo run of one scheme.
    Simulate(SimArgs),
    /// Five-variable minimization for one setting.
    Bounds(BoundsArgs),
    /// Check every numeric fact; exits nonzero if any fails.
    VerifyFacts {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    TightPath3,
    Star,
    Triangle,
    RandomBipartite,
    RandomGeneral,
    D1,
    D2,
    SingleEdgeHard,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    family: FamilyName,
    /// tight-path3 length parameter.
    #[arg(long, default_value_t = 100)]
    n: u32,
    /// Star size, d2 depth.
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// d2 weight base N.
    #[arg(long, default_value_t = 10.0)]
    base: f64,
    #[arg(long, default_value_t = 4)]
    offline: u32,
    #[arg(long, default_value_t = 5)]
    online: u32,
    /// random-general vertex count.
    #[arg(long, default_value_t = 6)]
    vertices: u32,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// single-edge-hard job value.
    #[arg(long, default_value_t = 10.0)]
    value: f64,
    /// single-edge-hard price grid, comma separated (default 0,1,..,value-1).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduce {
    TwoWeight,
    SingleWeight,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Revenue,
    Custom,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Revenue => Objective::Revenue,
            ObjectiveArg::Custom => Objective::Custom,
        }
    }
}

#[derive(clap::Args)]
struct LpArgs {
    #[arg(long, short)]
    instance: PathBuf,
    /// Custom when every menu entry has a `c`, revenue otherwise.
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long)]
    reduce: Option<Reduce>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Scheme {
    RoOcrs,
    Stochastic,
    Vertex,
    Pricing,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttenuationArg {
    Trivial,
    A1,
    A2,
}

#[derive(clap::Args)]
struct SimArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long)]
    scheme: Scheme,
    #[arg(long, default_value = "a2")]
    attenuation: AttenuationArg,
    #[arg(long, default_value_t = 0.171)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long, env = "OCRS_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Fractional point for the pricing scheme; solved from the LP when absent.
    #[arg(long)]
    point: Option<PathBuf>,
    /// Custom when every menu entry has a `c`, revenue otherwise.
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    /// Per-edge CSV.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// JSON summary.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    General,
    Bipartite,
    #[value(name = "patience_general", alias = "patience-general", alias = "patience")]
    PatienceGeneral,
    #[value(name = "patience_one_sided", alias = "patience-one-sided", alias = "one-sided")]
    PatienceOneSided,
}

impl From<SettingArg> for Setting {
    fn from(s: SettingArg) -> Self {
        match s {
            SettingArg::General => Setting::General,
            SettingArg::Bipartite => Setting::Bipartite,
            SettingArg::PatienceGeneral => Setting::PatienceGeneral,
            SettingArg::PatienceOneSided => Setting::PatienceOneSided,
        }
    }
}

#[derive(clap::Args)]
struct BoundsArgs {
    #[arg(long, default_value = "general")]
    setting: SettingArg,
    /// Defaults to the setting's own alpha (0.171, 0.16 or 0.162).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 81)]
    grid: usize,
    #[arg(long, default_value_t = 3)]
    refinements: usize,
    /// Print the minimum for `STEPS` alphas in [LO, HI] instead: `LO,HI,STEPS`.
    #[arg(long)]
    scan_alpha: Option<String>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, env = "OCRS_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Comma separated criterion ids; all when absent.
    #[arg(long)]
    criteria: Option<String>,
    /// Print every detail line, not just those of failing criteria.
    #[arg(long, short)]
    verbose: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether everything checked held.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen(a) => gen(a).map(|_| true),
        Command::Lp(a) => lp(a).map(|_| true),
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Bounds(a) => bounds(a).map(|_| true),
        Command::VerifyFacts { out } => facts(out),
        Command::Suite(a) => suite(a),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let family = match a.family {
        FamilyName::TightPath3 => Family::TightPath3 { n: a.n },
        FamilyName::Star => Family::Star { k: a.k },
        FamilyName::Triangle => Family::Triangle,
        FamilyName::RandomBipartite => Family::RandomBipartite {
            offline: a.offline,
            online: a.online,
            density: a.density,
            seed: a.seed,
        },
        FamilyName::RandomGeneral => Family::RandomGeneral {
            n: a.vertices,
            density: a.density,
            seed: a.seed,
        },
        FamilyName::D1 => Family::GreedyCounterexampleD1 { eps: a.eps },
        FamilyName::D2 => Family::GreedyCounterexampleD2 { base: a.base, k: a.k, eps: a.eps },
        FamilyName::SingleEdgeHard => Family::SingleEdgeHard {
            k: a.value,
            grid: match &a.grid {
                Some(g) => parse_list(g)?,
                None => (0..(a.value - 1.0).max(0.0).floor() as u32 + 1).map(f64::from).collect(),
            },
        },
    };
    let g = generate_family(&family)?;
    write_json(&a.out, &InstanceFile::from_instance(&g.instance, g.x.as_deref()))?;
    println!("|V|={} |E|={} mode={}", g.instance.vertices.len(), g.instance.edges.len(), mode_name(&g.instance));
    Ok(())
}

fn mode_name(inst: &PricingInstance) -> String {
    serde_json::to_value(inst.mode).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn check_instance(inst: &PricingInstance) -> Result<()> {
    let v = validate_instance(inst);
    if !v.is_empty() {
        let lines: Vec<String> = v.iter().map(|v| v.to_string()).collect();
        bail!("invalid instance:\n  {}", lines.join("\n  "));
    }
    Ok(())
}

fn pick_objective(arg: Option<ObjectiveArg>, inst: &PricingInstance) -> Objective {
    match arg {
        Some(o) => o.into(),
        None if inst.edges.iter().flat_map(|e| &e.menu).all(|m| m.coef.is_some()) && !inst.edges.is_empty() => Objective::Custom,
        None => Objective::Revenue,
    }
}

fn lp(a: LpArgs) -> Result<()> {
    let loaded = read_instance(&a.instance)?;
    let inst = &loaded.instance;
    check_instance(inst)?;
    let objective = pick_objective(a.objective, inst);
    let sol = solve_lp(&build_lp_pricing(inst, objective)?)?;
    println!("objective {:.12}", sol.objective);
    println!("simplex pivots {}", sol.iterations);
    let mut point = sol.point;
    if let Some(r) = a.reduce {
        point = two_weight_reduction(inst, &point, objective)?;
        let two = objective_value(inst, &point, objective)?;
        println!("two-weight objective {two:.12}");
        if matches!(r, Reduce::SingleWeight) {
            point = single_weight_selection(inst, &point, objective)?;
            let one = objective_value(inst, &point, objective)?;
            let kept = if sol.objective > 0.0 { one / sol.objective } else { 1.0 };
            println!("single-weight objective {one:.12} (retained fraction {kept:.6})");
        }
    }
    if let Some(out) = a.out {
        write_json(&out, &point_entries(inst, &point))?;
    }
    Ok(())
}

fn attenuation(a: &SimArgs) -> Result<AttenuationSpec> {
    let kind = match a.attenuation {
        AttenuationArg::Trivial => AttenuationKind::Trivial,
        AttenuationArg::A1 => AttenuationKind::A1,
        AttenuationArg::A2 => AttenuationKind::A2,
    };
    Ok(AttenuationSpec::new(kind, a.alpha)?)
}

fn simulate(a: SimArgs) -> Result<()> {
    ensure(a.trials >= 1, || "trials must be at least 1".into())?;
    let loaded = read_instance(&a.instance)?;
    let inst = &loaded.instance;
    check_instance(inst)?;
    let spec = attenuation(&a)?;
    let objective = pick_objective(a.objective, inst);

    // the LP point, when the instance does not carry x or the scheme needs prices
    let lp_point = |inst: &PricingInstance| -> Result<(FractionalPoint, f64)> {
        let sol = solve_lp(&build_lp_pricing(inst, objective)?)?;
        Ok((sol.point, sol.objective))
    };

    let mut lp_objective = None;
    let engine: Box<dyn TrialEngine> = match a.scheme {
        Scheme::RoOcrs | Scheme::Vertex => {
            let x = match &loaded.x {
                Some(x) => x.clone(),
                None => lp_point(inst)?.0.x,
            };
            if a.scheme == Scheme::Vertex {
                Box::new(VertexArrival::new(inst, &x)?)
            } else {
                Box::new(RoOcrs::new(inst, &x, &spec)?)
            }
        }
        Scheme::Stochastic => {
            let single = inst.edges.iter().all(|e| e.menu.len() == 1);
            let (y, p) = match &loaded.x {
                Some(x) if single => {
                    let mut y = Vec::with_capacity(x.len());
                    let mut p = Vec::with_capacity(x.len());
                    for (e, edge) in inst.edges.iter().enumerate() {
                        let pe = edge.menu[0].prob;
                        ensure(pe > 0.0 || x[e] == 0.0, || format!("edge {}: x > 0 with p = 0", edge.id))?;
                        y.push(if pe > 0.0 { x[e] / pe } else { 0.0 });
                        p.push(pe);
                    }
                    (y, p)
                }
                _ => {
                    if loaded.x.is_some() {
                        println!("menus have several entries; using LP marginals instead of the file's x");
                    }
                    let m = marginals(inst, &lp_point(inst)?.0.y);
                    (m.y_e, m.p_e)
                }
            };
            Box::new(StochasticOcrs::new(inst, &y, &p, &spec)?)
        }
        Scheme::Pricing => {
            let point = match &a.point {
                Some(path) => {
                    let p = read_point(path, inst)?;
                    lp_objective = Some(objective_value(inst, &p, objective)?);
                    p
                }
                None => {
                    let (p, v) = lp_point(inst)?;
                    lp_objective = Some(v);
                    p
                }
            };
            Box::new(SequentialPricing::new(inst, &point, &spec, objective)?)
        }
    };

    let report = monte_carlo(engine.as_ref(), a.trials, a.seed, a.workers)?;
    print_report(&a, &report, lp_objective);
    if let Some(out) = &a.out {
        write_report_csv(out, &report)?;
    }
    if let Some(out) = &a.summary {
        let name = match a.scheme {
            Scheme::RoOcrs => "ro-ocrs",
            Scheme::Stochastic => "stochastic",
            Scheme::Vertex => "vertex",
            Scheme::Pricing => "pricing",
        };
        write_json(out, &Summary::new(name, &report, lp_objective))?;
    }
    Ok(())
}

fn print_report(a: &SimArgs, r: &SimulationReport, lp_objective: Option<f64>) {
    println!("trials {} seed {}", r.trials, r.seed);
    if r.min_ratio.is_finite() {
        println!(
            "min ratio {:.5} (edge {}), conditional estimate {:.5}",
            r.min_ratio,
            r.min_ratio_edge.map_or("-".to_string(), |e| e.to_string()),
            r.min_cond_ratio
        );
    }
    if a.scheme == Scheme::Pricing {
        let half = 0.5 * (r.revenue_ci.1 - r.revenue_ci.0);
        println!("revenue {:.6} +- {:.6} (conditional {:.6} +- {:.6})", r.revenue_mean, half, r.revenue_cond_mean, r.revenue_cond_half);
        if let Some(v) = lp_objective {
            if v > 0.0 {
                println!("LP objective {v:.6}, revenue / LP {:.5}", r.revenue_cond_mean / v);
            }
        }
    }
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let setting: Setting = a.setting.into();
    if let Some(scan) = &a.scan_alpha {
        let v = parse_list(scan)?;
        ensure(v.len() == 3 && v[2] >= 1.0, || "--scan-alpha takes LO,HI,STEPS".into())?;
        let steps = v[2] as usize;
        println!("alpha,minimum");
        for i in 0..steps {
            let alpha = if steps == 1 { v[0] } else { v[0] + (v[1] - v[0]) * i as f64 / (steps - 1) as f64 };
            let c = five_var_minimize(setting, alpha, a.grid, a.refinements)?;
            println!("{alpha:.6},{:.6}", c.minimum);
        }
        return Ok(());
    }
    let alpha = a.alpha.unwrap_or(setting.default_alpha());
    let c = five_var_minimize(setting, alpha, a.grid, a.refinements)?;
    println!("setting {:?} alpha {} minimum {:.6}", setting, alpha, c.minimum);
    let p = c.point;
    println!("at x={:.6} d={:.6} dbig={:.6} s={:.6} m={:.6}", p.x, p.d, p.dbig, p.s, p.m);
    let sc = c.sign_conditions;
    println!(
        "sign conditions: c1 a - c2 (1-2a)^2 = {:.5} ({}), c1 a - 2 c2 (1-2a)^2 = {:.5} ({})",
        sc.s_f_coefficient,
        if sc.s_f_ok { "ok" } else { "negative" },
        sc.small_x_sq_coefficient,
        if sc.small_x_sq_ok { "ok" } else { "negative" }
    );
    if let Some(out) = a.out {
        write_json(&out, &c)?;
    }
    Ok(())
}

fn facts(out: Option<PathBuf>) -> Result<bool> {
    let rows = verify_facts();
    for r in &rows {
        println!("{:<26} {:<5} {:>12.4e}  {}", r.id, r.holds, r.margin, r.detail);
    }
    if let Some(path) = out {
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["fact_id", "holds", "margin", "detail"])?;
        for r in &rows {
            w.serialize((&r.id, r.holds, r.margin, &r.detail))?;
        }
        w.flush()?;
    }
    let failed = rows.iter().filter(|r| !r.holds).count();
    if failed > 0 {
        println!("{failed} of {} facts fail", rows.len());
    }
    Ok(failed == 0)
}

fn suite(a: SuiteArgs) -> Result<bool> {
    ensure(a.trials >= 1, || "trials must be at least 1".into())?;
    let ids: Vec<u8> = match &a.criteria {
        Some(s) => s.split(',').map(|t| t.trim().parse::<u8>().with_context(|| format!("bad criterion id {t:?}"))).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let cfg = BatteryConfig {
        trials: a.trials,
        seed: a.seed,
        workers: a.workers,
    };
    let results = run_battery(cfg, &ids)?;
    for r in &results {
        println!("{}", r.line());
        if a.verbose || !r.passed {
            for d in &r.detail {
                println!("    {d}");
            }
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed} of {} criteria pass", results.len());
    Ok(passed == results.len())
}
