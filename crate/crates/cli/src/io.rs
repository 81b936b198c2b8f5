//! File formats: instance JSON, fractional points, simulation CSV/JSON.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ocrs_core::graph::{edge_vector, Edge, MenuEntry, Mode, Patience, PricingInstance, Side, Vertex};
use ocrs_core::lp::FractionalPoint;
use ocrs_core::simulate::SimulationReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub mode: Mode,
    pub vertices: Vec<VertexDto>,
    pub edges: Vec<EdgeDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<XEntry>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDto {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Missing means unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patience: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDto {
    pub id: u64,
    pub u: u64,
    pub v: u64,
    pub menu: Vec<MenuDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MenuDto {
    pub w: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XEntry {
    pub edge: u64,
    pub value: f64,
}

/// A parsed instance file.
pub struct Loaded {
    pub instance: PricingInstance,
    pub x: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_instance(inst: &PricingInstance, x: Option<&[f64]>) -> Self {
        Self {
            mode: inst.mode,
            vertices: inst
                .vertices
                .iter()
                .map(|v| VertexDto {
                    id: v.id,
                    side: (v.side != Side::None).then_some(v.side),
                    value: (v.value != 0.0).then_some(v.value),
                    patience: v.patience.limit(),
                })
                .collect(),
            edges: inst
                .edges
                .iter()
                .map(|e| EdgeDto {
                    id: e.id,
                    u: e.u,
                    v: e.v,
                    menu: e.menu.iter().map(|m| MenuDto { w: m.price, p: m.prob, c: m.coef }).collect(),
                })
                .collect(),
            x: x.map(|x| inst.edges.iter().zip(x).map(|(e, &value)| XEntry { edge: e.id, value }).collect()),
        }
    }

    pub fn into_loaded(self) -> Result<Loaded> {
        let instance = PricingInstance {
            mode: self.mode,
            vertices: self
                .vertices
                .into_iter()
                .map(|v| Vertex {
                    id: v.id,
                    side: v.side.unwrap_or(Side::None),
                    value: v.value.unwrap_or(0.0),
                    patience: v.patience.map_or(Patience::Unbounded, Patience::Limited),
                })
                .collect(),
            edges: self
                .edges
                .into_iter()
                .map(|e| Edge {
                    id: e.id,
                    u: e.u,
                    v: e.v,
                    menu: e.menu.into_iter().map(|m| MenuEntry { price: m.w, prob: m.p, coef: m.c }).collect(),
                })
                .collect(),
        };
        let x = match self.x {
            Some(entries) => {
                let pairs: Vec<(u64, f64)> = entries.iter().map(|e| (e.edge, e.value)).collect();
                Some(edge_vector(&instance, &pairs)?)
            }
            None => None,
        };
        Ok(Loaded { instance, x })
    }
}

pub fn read_instance(path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: InstanceFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.into_loaded()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointEntry {
    pub edge: u64,
    pub weight: f64,
    pub y: f64,
}

/// Nonzero entries of a point as `{edge, weight, y}` triples.
pub fn point_entries(inst: &PricingInstance, point: &FractionalPoint) -> Vec<PointEntry> {
    let mut out = Vec::new();
    for (e, edge) in inst.edges.iter().enumerate() {
        for (w, m) in edge.menu.iter().enumerate() {
            if point.y[e][w] != 0.0 {
                out.push(PointEntry { edge: edge.id, weight: m.price, y: point.y[e][w] });
            }
        }
    }
    out
}

pub fn read_point(path: &Path, inst: &PricingInstance) -> Result<FractionalPoint> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let entries: Vec<PointEntry> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let index: HashMap<u64, usize> = inst.edges.iter().enumerate().map(|(i, e)| (e.id, i)).collect();
    let mut y: Vec<Vec<f64>> = inst.edges.iter().map(|e| vec![0.0; e.menu.len()]).collect();
    for p in entries {
        let &e = index.get(&p.edge).ok_or_else(|| anyhow!("point refers to unknown edge {}", p.edge))?;
        let w = inst.edges[e]
            .menu
            .iter()
            .enumerate()
            .position(|(w, m)| m.price == p.weight && y[e][w] == 0.0)
            .ok_or_else(|| anyhow!("edge {} has no free menu entry with weight {}", p.edge, p.weight))?;
        y[e][w] = p.y;
    }
    Ok(FractionalPoint::from_y(inst, y)?)
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub scheme: &'a str,
    pub min_ratio: Option<f64>,
    pub min_ratio_edge: Option<u64>,
    pub min_cond_ratio: Option<f64>,
    pub revenue_mean: f64,
    pub revenue_ci: (f64, f64),
    pub revenue_cond_mean: f64,
    pub revenue_cond_half: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_objective: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl<'a> Summary<'a> {
    pub fn new(scheme: &'a str, r: &SimulationReport, lp_objective: Option<f64>) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            scheme,
            min_ratio: finite(r.min_ratio),
            min_ratio_edge: r.min_ratio_edge,
            min_cond_ratio: finite(r.min_cond_ratio),
            revenue_mean: r.revenue_mean,
            revenue_ci: r.revenue_ci,
            revenue_cond_mean: r.revenue_cond_mean,
            revenue_cond_half: r.revenue_cond_half,
            lp_objective,
            trials: r.trials,
            seed: r.seed,
        }
    }
}

pub fn write_report_csv(path: &Path, r: &SimulationReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["edge_id", "x_e", "freq", "ci_lo", "ci_hi", "freq_r0", "freq_r1", "ratio", "cond_ratio", "cond_ratio_half"])?;
    for e in &r.edges {
        w.serialize((e.edge_id, e.x_e, e.freq, e.ci_lo, e.ci_hi, e.freq_r0, e.freq_r1, e.ratio, e.cond_ratio, e.cond_ratio_half))?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad number {t:?}: {e}")))
        .collect()
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if !cond {
        bail!(msg());
    }
    Ok(())
}
