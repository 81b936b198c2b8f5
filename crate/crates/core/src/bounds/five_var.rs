//! The five-variable program in `(s, d, dBIG, x, m)` whose minimum is the
//! certified balancedness of each setting.
//!
//! Variables are searched through the unit cube `u`, mapped onto the feasible
//! set by `x = u0`, `d = 2 (1 - x) u1`, `dBIG = d u2`, `m = u3`, `s = 2 - x - d`,
//! so every visited point satisfies the constraints.

use serde::{Deserialize, Serialize};

use super::nelder_mead::nelder_mead;
use super::{LemmaConstants, Setting, QUAD_TOL};
use crate::error::{input, Error, Result};

/// Grid cells that seed Nelder–Mead.
const SEEDS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizerPoint {
    pub s: f64,
    pub d: f64,
    pub dbig: f64,
    pub x: f64,
    pub m: f64,
}

impl MinimizerPoint {
    fn from_unit(u: &[f64], m_free: bool) -> Self {
        let c = |v: f64| v.clamp(0.0, 1.0);
        let x = c(u[0]);
        let d = 2.0 * (1.0 - x) * c(u[1]);
        let dbig = d * c(u[2]);
        let m = if m_free { c(u[3]) } else { 0.0 };
        Self { s: (2.0 - x - d).max(0.0), d, dbig, x, m }
    }

    /// Constraint violations larger than `tol`, empty when feasible.
    pub fn violations(&self, tol: f64) -> Vec<&'static str> {
        let mut v = Vec::new();
        if (self.s + self.d - (2.0 - self.x)).abs() > tol {
            v.push("s + d = 2 - x");
        }
        if self.d > 2.0 * (1.0 - self.x) + tol {
            v.push("d <= 2(1 - x)");
        }
        if self.dbig > self.d + tol || self.dbig < -tol {
            v.push("0 <= dBIG <= d");
        }
        if self.m < -tol || self.m > 1.0 + tol {
            v.push("0 <= m <= 1");
        }
        if self.x < -tol || self.s < -tol {
            v.push("x, s >= 0");
        }
        v
    }
}

/// `(1 - a s)(c0 + c1 (s + a m^2 + a dBIG (1 - m)/2) + c2 (1 - 2a)^2 (d - dBIG)(1 - m))`.
pub fn five_var_objective(c: &LemmaConstants, alpha: f64, p: &MinimizerPoint) -> f64 {
    (1.0 - alpha * p.s)
        * (c.r0_base
            + c.r0_slope * (p.s + alpha * p.m * p.m + alpha * p.dbig * (1.0 - p.m) / 2.0)
            + c.r1 * (1.0 - 2.0 * alpha).powi(2) * (p.d - p.dbig) * (1.0 - p.m))
}

/// The two coefficient signs the reduction to five variables relies on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignConditions {
    /// `c1 a - c2 (1 - 2a)^2`; must be >= 0 to replace `s_f` by `x_f`.
    pub s_f_coefficient: f64,
    pub s_f_ok: bool,
    /// `c1 a - 2 c2 (1 - 2a)^2`; must be >= 0 to drop small `x_f^2` terms.
    pub small_x_sq_coefficient: f64,
    pub small_x_sq_ok: bool,
}

impl SignConditions {
    fn new(c: &LemmaConstants, alpha: f64) -> Self {
        let q = c.r1 * (1.0 - 2.0 * alpha).powi(2);
        let a = c.r0_slope * alpha - q;
        let b = c.r0_slope * alpha - 2.0 * q;
        Self {
            s_f_coefficient: a,
            s_f_ok: a >= 0.0,
            small_x_sq_coefficient: b,
            small_x_sq_ok: b >= 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub setting: Setting,
    pub alpha: f64,
    pub point: MinimizerPoint,
    pub minimum: f64,
    /// Best value on the grid, before refinement.
    pub grid_minimum: f64,
    pub grid_resolution: usize,
    pub refinements: usize,
    pub quadrature_tol: f64,
    pub constants: LemmaConstants,
    pub sign_conditions: SignConditions,
}

pub fn five_var_minimize(setting: Setting, alpha: f64, grid_resolution: usize, refinements: usize) -> Result<BoundCertificate> {
    five_var_minimize_with(setting, setting.constants(), alpha, grid_resolution, refinements)
}

/// As `five_var_minimize`, with the lemma constants supplied by the caller.
pub fn five_var_minimize_with(setting: Setting, constants: LemmaConstants, alpha: f64, grid_resolution: usize, refinements: usize) -> Result<BoundCertificate> {
    if !(0.0..=0.5).contains(&alpha) {
        return input(format!("alpha = {alpha} outside [0, 0.5]"));
    }
    if grid_resolution < 2 {
        return input("grid resolution must be at least 2");
    }
    let m_free = setting.m_free();
    let dims = if m_free { 4 } else { 3 };
    let g = grid_resolution;
    let step = 1.0 / (g - 1) as f64;
    let objective = |u: &[f64]| five_var_objective(&constants, alpha, &MinimizerPoint::from_unit(u, m_free));

    // grid phase: best SEEDS cells per first-coordinate slice, merged in slice order
    let slice = |i0: usize| -> Vec<(f64, Vec<usize>)> {
        let mut best: Vec<(f64, Vec<usize>)> = Vec::with_capacity(SEEDS + 1);
        let inner = g.pow(dims as u32 - 1);
        let mut idx = vec![0usize; dims];
        let mut u = vec![0.0; dims];
        for flat in 0..inner {
            idx[0] = i0;
            let mut rest = flat;
            for k in (1..dims).rev() {
                idx[k] = rest % g;
                rest /= g;
            }
            for k in 0..dims {
                u[k] = idx[k] as f64 * step;
            }
            let v = objective(&u);
            if best.len() < SEEDS || v < best[best.len() - 1].0 {
                let pos = best.partition_point(|(b, _)| *b <= v);
                best.insert(pos, (v, idx.clone()));
                best.truncate(SEEDS);
            }
        }
        best
    };
    #[cfg(feature = "parallel")]
    let slices: Vec<Vec<(f64, Vec<usize>)>> = {
        use rayon::prelude::*;
        (0..g).into_par_iter().map(slice).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let slices: Vec<Vec<(f64, Vec<usize>)>> = (0..g).map(slice).collect();

    let mut cells: Vec<(f64, Vec<usize>)> = slices.into_iter().flatten().collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    cells.truncate(SEEDS);
    let Some(first) = cells.first() else {
        return Err(Error::Internal("empty feasible grid".into()));
    };
    let grid_minimum = first.0;

    let mut best_u: Vec<f64> = first.1.iter().map(|&i| i as f64 * step).collect();
    let mut best_v = grid_minimum;
    for (_, idx) in &cells {
        let start: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        let r = nelder_mead(objective, &start, step, 5_000, 1e-15, 1e-12);
        if r.value < best_v {
            best_v = r.value;
            best_u = r.x;
        }
    }
    let mut scale = step;
    for _ in 0..refinements {
        scale *= 0.25;
        let r = nelder_mead(objective, &best_u, scale, 5_000, 1e-16, 1e-13);
        if r.value < best_v {
            best_v = r.value;
            best_u = r.x;
        }
    }
    let point = MinimizerPoint::from_unit(&best_u, m_free);
    if let Some(v) = point.violations(1e-12).first() {
        return Err(Error::Internal(format!("minimizer violates {v}")));
    }
    Ok(BoundCertificate {
        setting,
        alpha,
        point,
        minimum: five_var_objective(&constants, alpha, &point),
        grid_minimum,
        grid_resolution,
        refinements,
        quadrature_tol: QUAD_TOL,
        constants,
        sign_conditions: SignConditions::new(&constants, alpha),
    })
}
