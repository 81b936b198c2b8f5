//! Numeric fact checks on dense deterministic grids, and the patience scans
//! over `ℓ ∈ {1, …, 20, ∞}`.

use serde::{Deserialize, Serialize};

use super::{h1_closed, h2, h_unchecked, phi, q, z};
use crate::rng::{CounterRng, Purpose};

/// Patience values scanned by the ℓ-minimality checks; `None` is unbounded.
pub const ELL_RANGE: [Option<u32>; 21] = {
    let mut r = [None; 21];
    let mut i = 0;
    while i < 20 {
        r[i] = Some(i as u32 + 1);
        i += 1;
    }
    r
};

const GRID_1D: usize = 10_001;
const GRID_2D: usize = 101;
const SCAN_GRID: usize = 101;
/// Slack allowed for quadrature-backed comparisons.
const QUAD_SLACK: f64 = 1e-9;
/// Largest `K = s_e + α Σ x_f s_f` reachable with `α ≤ 1/2`.
const K_MAX: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactCheck {
    pub id: String,
    pub holds: bool,
    /// Worst-case slack over the grid; negative when the fact fails.
    pub margin: f64,
    pub detail: String,
}

/// Values of one integral across `ELL_RANGE`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllScan {
    pub values: Vec<(Option<u32>, f64)>,
}

impl EllScan {
    /// The minimizing ℓ, first in scan order on ties.
    pub fn argmin(&self) -> Option<u32> {
        self.values
            .iter()
            .fold(None::<(Option<u32>, f64)>, |best, &(l, v)| match best {
                Some((_, b)) if b <= v => best,
                _ => Some((l, v)),
            })
            .and_then(|(l, _)| l)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min)
    }

    pub fn at(&self, ell: Option<u32>) -> f64 {
        self.values.iter().find(|v| v.0 == ell).map(|v| v.1).unwrap_or(f64::NAN)
    }

    /// `min_{ℓ ≠ 2} I_ℓ - I_2`; nonnegative iff ℓ = 2 is a minimizer.
    pub fn two_gap(&self) -> f64 {
        let two = self.at(Some(2));
        self.values
            .iter()
            .filter(|v| v.0 != Some(2))
            .map(|v| v.1 - two)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn ell_scan(f: impl Fn(Option<u32>) -> f64) -> EllScan {
    EllScan {
        values: ELL_RANGE.iter().map(|&l| (l, f(l))).collect(),
    }
}

fn ell_label(l: Option<u32>) -> String {
    l.map_or("inf".to_string(), |l| l.to_string())
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Evaluates `f` on every point and returns `(worst value, its index)`,
/// lowest index on ties.
fn worst<T: Sync>(points: &[T], f: impl Fn(&T) -> f64 + Sync) -> (f64, usize) {
    #[cfg(feature = "parallel")]
    let vals: Vec<f64> = {
        use rayon::prelude::*;
        points.par_iter().map(&f).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let vals: Vec<f64> = points.iter().map(&f).collect();
    vals.iter()
        .enumerate()
        .fold((f64::INFINITY, 0), |(b, bi), (i, &v)| if v < b || v.is_nan() && !b.is_nan() { (v, i) } else { (b, bi) })
}

fn check(id: &str, margin: f64, slack: f64, detail: String) -> FactCheck {
    FactCheck {
        id: id.to_string(),
        holds: margin >= -slack,
        margin,
        detail,
    }
}

/// `∫_0^1 e^{-y(2-K)} φ_ℓ(y)^sides dy`, the R0 integral once `d_e + x_e ≤ 2`
/// has been used. `sides` is 2 when both endpoints have finite patience.
fn r0_integral(ell: Option<u32>, k: f64, sides: i32) -> f64 {
    q(|y| (-y * (2.0 - k)).exp() * phi(ell, y).powi(sides), 0.0, 1.0)
}

/// `∫_0^b e^{-2c} φ_ℓ(c) dc`, the blocking-neighbor integral.
fn blocking_integral(ell: Option<u32>, b: f64) -> f64 {
    q(|c| (-2.0 * c).exp() * phi(ell, c), 0.0, b)
}

/// `∫_0^1 e^{-2a+ax} h1(a, x) φ_ℓ(a)^sides da`, the R1 integral.
fn r1_integral(ell: Option<u32>, x: f64, sides: i32) -> f64 {
    q(|a| (-2.0 * a + a * x).exp() * h1_closed(a, x) * phi(ell, a).powi(sides), 0.0, 1.0)
}

fn ell_min_row(id: &str, what: &str, args: &[f64], arg_name: &str, integral: impl Fn(Option<u32>, f64) -> f64 + Sync) -> FactCheck {
    let scans: Vec<EllScan> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            args.par_iter().map(|&t| ell_scan(|l| integral(l, t))).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            args.iter().map(|&t| ell_scan(|l| integral(l, t))).collect()
        }
    };
    let (margin, wi) = scans
        .iter()
        .enumerate()
        .map(|(i, s)| (s.two_gap(), i))
        .fold((f64::INFINITY, 0), |b, c| if c.0 < b.0 { c } else { b });
    let failing: Vec<usize> = (0..args.len()).filter(|&i| scans[i].two_gap() < -QUAD_SLACK).collect();
    let w = &scans[wi];
    let mut detail = format!(
        "{what}: worst {arg_name}={:.4}, argmin l={}, I_2={:.6}, min I={:.6}",
        args[wi],
        ell_label(w.argmin()),
        w.at(Some(2)),
        w.min()
    );
    if let (Some(&a), Some(&b)) = (failing.first(), failing.last()) {
        detail.push_str(&format!("; l=2 not minimal for {arg_name} in [{:.4}, {:.4}] ({} of {} points)", args[a], args[b], failing.len(), args.len()));
    }
    check(id, margin, QUAD_SLACK, detail)
}

/// `min_ℓ I_ℓ(K) - (c0 + c1 K)` over the K grid.
fn ell_floor_row(id: &str, sides: i32, c0: f64, c1: f64) -> FactCheck {
    let ks = grid(0.0, K_MAX, SCAN_GRID);
    let (margin, i) = worst(&ks, |&k| ell_scan(|l| r0_integral(l, k, sides)).min() - (c0 + c1 * k));
    check(id, margin, QUAD_SLACK, format!("min over l of the R0 integral >= {c0} + {c1} K on K in [0, {K_MAX}]; worst K={:.4}", ks[i]))
}

/// Runs every fact check. Rows are in a fixed order.
pub fn verify_facts() -> Vec<FactCheck> {
    let mut rows = Vec::new();

    // x (1 - e^{-a}) <= 1 - e^{-ax}
    let pts: Vec<(f64, f64)> = grid(0.0, 1.0, GRID_2D)
        .into_iter()
        .flat_map(|a| grid(0.0, 1.0, GRID_2D).into_iter().map(move |x| (a, x)))
        .collect();
    let (m, i) = worst(&pts, |&(a, x)| -(-a * x).exp_m1() + x * (-a).exp_m1());
    rows.push(check("fact_3_3_concavity", m, 1e-14, format!("{}x{} grid on [0,1]^2; worst (a, x)=({:.3}, {:.3})", GRID_2D, GRID_2D, pts[i].0, pts[i].1)));

    // prod (1 - R_i) >= 1 - sum R_i on seeded random tuples
    let rng = CounterRng::new(0x0D2);
    let tuples: Vec<Vec<f64>> = (0..10_000u64)
        .map(|t| {
            let mut s = rng.trial(t).sequence(Purpose::Auxiliary);
            let n = 1 + (s.next_f64() * 8.0) as usize;
            (0..n).map(|_| s.next_f64()).collect()
        })
        .collect();
    let (m, i) = worst(&tuples, |r| r.iter().map(|v| 1.0 - v).product::<f64>() - (1.0 - r.iter().sum::<f64>()));
    rows.push(check("fact_d2_product", m, 1e-14, format!("10000 seeded tuples of length 1..8 in [0,1); worst length {}", tuples[i].len())));

    // h(2 - x) >= h(2) + 0.14 x
    let xs = grid(0.0, 2.0, GRID_1D);
    let (m, i) = worst(&xs, |&x| h_unchecked(2.0 - x) - (h2() + 0.14 * x));
    rows.push(check("h_linear_underestimate", m, 1e-14, format!("{GRID_1D} points on [0,2]; worst x={:.4}", xs[i])));

    // x z(x) >= 0.055 x, checked as z(x) >= 0.055
    let xs = grid(0.0, 1.0, GRID_1D);
    let (m, i) = worst(&xs, |&x| z(x).unwrap_or(f64::NAN) - 0.055);
    rows.push(check("fact_b3_z", m, QUAD_SLACK, format!("{GRID_1D} points on [0,1]; worst x={:.4}", xs[i])));

    // integral floors with l = 2 substituted
    let ks = grid(0.0, K_MAX, GRID_1D);
    let (m, i) = worst(&ks, |&k| q(|y| (-y * (4.0 - k)).exp() * (1.0 + y).powi(2), 0.0, 1.0) - (0.382 + 0.117 * k));
    rows.push(check("fact_c1_patience_r0", m, QUAD_SLACK, format!("{GRID_1D} points K in [0,{K_MAX}]; worst K={:.4}", ks[i])));
    let (m, i) = worst(&ks, |&k| q(|y| (-y * (3.0 - k)).exp() * (1.0 + y), 0.0, 1.0) - (0.405 + 0.131 * k));
    rows.push(check("fact_c3_one_sided_r0", m, QUAD_SLACK, format!("{GRID_1D} points K in [0,{K_MAX}]; worst K={:.4}", ks[i])));

    let (m, i) = worst(&xs, |&x| q(|a| (-4.0 * a + a * x).exp() * h1_closed(a, x) * (1.0 + a).powi(2), 0.0, 1.0) - 0.181);
    rows.push(check("fact_4_5_patience_r1", m, QUAD_SLACK, format!("{GRID_1D} points x in [0,1]; worst x={:.4}", xs[i])));
    let (m, i) = worst(&xs, |&x| q(|a| (-3.0 * a + a * x).exp() * h1_closed(a, x) * (1.0 + a), 0.0, 1.0) - 0.209);
    rows.push(check("fact_c4_one_sided_r1", m, QUAD_SLACK, format!("{GRID_1D} points x in [0,1]; worst x={:.4}", xs[i])));

    // is l = 2 the worst patience?
    let ks = grid(0.0, K_MAX, SCAN_GRID);
    for (id, sides) in [("ell_min_r0_two_sided", 2), ("ell_min_r0_one_sided", 1)] {
        let what = if sides == 2 { "int e^{-y(2-K)} phi_l^2 at K=0" } else { "int e^{-y(2-K)} phi_l at K=0" };
        let mut row = ell_min_row(id, what, &[0.0], "K", |l, k| r0_integral(l, k, sides));
        if let Some(k) = ks.iter().find(|&&k| ell_scan(|l| r0_integral(l, k, sides)).two_gap() < -QUAD_SLACK) {
            row.detail.push_str(&format!("; for K >= {k:.2} the argmin moves past l=2"));
        }
        rows.push(row);
    }
    rows.push(ell_floor_row("ell_floor_r0_two_sided", 2, 0.382, 0.117));
    rows.push(ell_floor_row("ell_floor_r0_one_sided", 1, 0.405, 0.131));
    let bs = grid(0.0, 1.0, SCAN_GRID);
    rows.push(ell_min_row("ell_min_blocking", "int_0^b e^{-2c} phi_l", &bs[1..], "b", blocking_integral));
    let xs = grid(0.0, 1.0, SCAN_GRID);
    rows.push(ell_min_row("ell_min_r1_two_sided", "int e^{-2a+ax} h1 phi_l^2", &xs, "x", |l, x| r1_integral(l, x, 2)));
    rows.push(ell_min_row("ell_min_r1_one_sided", "int e^{-2a+ax} h1 phi_l", &xs, "x", |l, x| r1_integral(l, x, 1)));
    rows
}
