//! Quadrature, the integrals behind the balancedness lemmas, the lemma
//! lower-bound formulas, numeric fact checks and the five-variable minimizer.

mod facts;
mod five_var;
mod nelder_mead;

pub use facts::{ell_scan, verify_facts, EllScan, FactCheck, ELL_RANGE};
pub use five_var::{five_var_minimize, five_var_minimize_with, five_var_objective, BoundCertificate, MinimizerPoint, SignConditions};
pub use nelder_mead::{nelder_mead, NelderMeadResult};

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::graph::EdgeStats;

pub const QUAD_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 60;

/// `(1 - e^{-x}) / x`, with `h(0) = 1`.
pub fn h(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return input(format!("h is defined for x >= 0, got {x}"));
    }
    Ok(h_unchecked(x))
}

fn h_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `h(2) = (1 - e^{-2}) / 2`.
pub fn h2() -> f64 {
    h_unchecked(2.0)
}

/// Adaptive Simpson on `[a, b]` with absolute error target `tol`.
pub fn quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !a.is_finite() || !b.is_finite() {
        return input(format!("bad quadrature arguments a={a} b={b} tol={tol}"));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("integrand is not finite on [{a}, {b}]")))
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return f64::NAN;
    }
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn q(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    quadrature(f, a, b, QUAD_TOL).unwrap_or(f64::NAN)
}

/// `z(0)` in closed form: `1/8 - 1/(8 e^4) - 1/(2 e^2)`.
pub fn z0() -> f64 {
    0.125 - 0.125 * (-4.0f64).exp() - 0.5 * (-2.0f64).exp()
}

/// `z(x) = ∫_0^1 e^{-2a+ax} ((1-e^{-xa})/x - (1-e^{-a(x+2)})/(x+2)) da`.
pub fn z(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return input(format!("z is defined on [0, 1], got {x}"));
    }
    if x == 0.0 {
        return Ok(z0());
    }
    quadrature(
        |a| (-2.0 * a + a * x).exp() * (-(-x * a).exp_m1() / x + (-a * (x + 2.0)).exp_m1() / (x + 2.0)),
        0.0,
        1.0,
        QUAD_TOL,
    )
}

fn h1_integrand(b: f64, x: f64) -> f64 {
    (-b * x).exp() * (4.0 - (3.0 * b + 4.0) * (-3.0 * b).exp())
}

/// `h1(a, x) = ∫_0^a e^{-bx} (4 - (3b+4) e^{-3b}) db`.
pub fn h1(a: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&x) {
        return input(format!("h1 needs a, x in [0, 1], got a={a} x={x}"));
    }
    quadrature(|b| h1_integrand(b, x), 0.0, a, QUAD_TOL)
}

/// Antiderivative form of `h1`, used inside the fact scans where `h1` sits under
/// another integral.
pub(crate) fn h1_closed(a: f64, x: f64) -> f64 {
    let first = if x == 0.0 { 4.0 * a } else { -4.0 * (-a * x).exp_m1() / x };
    let k = x + 3.0;
    let second = (4.0 / k + 3.0 / (k * k)) - (-k * a).exp() * ((3.0 * a + 4.0) / k + 3.0 / (k * k));
    first - second
}

/// Poisson CDF at `l - 1` with mean `y (l - 1)`: the chance a vertex with
/// patience `l` still has patience at time `y`. `None` means unbounded patience.
pub fn phi(ell: Option<u32>, y: f64) -> f64 {
    let Some(l) = ell else {
        return 1.0;
    };
    if l <= 1 {
        return 1.0;
    }
    let lambda = y * (l - 1) as f64;
    let mut term = (-lambda).exp();
    let mut sum = term;
    for k in 1..l {
        term *= lambda / k as f64;
        sum += term;
    }
    sum.min(1.0)
}

/// Which pair of lemmas (and which five-variable program) is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    General,
    Bipartite,
    PatienceGeneral,
    PatienceOneSided,
}

impl Setting {
    pub const ALL: [Setting; 4] = [Setting::General, Setting::Bipartite, Setting::PatienceGeneral, Setting::PatienceOneSided];

    pub fn constants(self) -> LemmaConstants {
        match self {
            Setting::General | Setting::Bipartite => LemmaConstants {
                r0_base: h2(),
                r0_slope: 0.14,
                r1: 0.0275,
                uses_m: true,
            },
            Setting::PatienceGeneral => LemmaConstants {
                r0_base: 0.382,
                r0_slope: 0.117,
                r1: 0.02,
                uses_m: true,
            },
            Setting::PatienceOneSided => LemmaConstants {
                r0_base: 0.405,
                r0_slope: 0.131,
                r1: 0.023,
                uses_m: false,
            },
        }
    }

    /// Whether `m_e` is a free variable of the five-variable program.
    pub fn m_free(self) -> bool {
        matches!(self, Setting::General | Setting::PatienceGeneral)
    }

    pub fn default_alpha(self) -> f64 {
        match self {
            Setting::General | Setting::Bipartite => 0.171,
            Setting::PatienceGeneral => 0.16,
            Setting::PatienceOneSided => 0.162,
        }
    }

    /// The balancedness constant claimed for this setting.
    pub fn claimed(self) -> f64 {
        match self {
            Setting::General => 0.45,
            Setting::Bipartite => 0.456,
            Setting::PatienceGeneral => 0.395,
            Setting::PatienceOneSided => 0.426,
        }
    }
}

/// Constants in `(1 - a s)(c0 + c1 (s + a Σ x_f s_f))` and
/// `(1 - a s)(1 - 2a)^2 Σ x_f (1 - m - x_f - s_f)^+ c2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    pub r0_base: f64,
    pub r0_slope: f64,
    pub r1: f64,
    /// One-sided variants drop `m_e` from the R1 bound.
    pub uses_m: bool,
}

/// Lower bound on `Pr[e matched and R0(e)]`. `neighbors` holds `(x_f, s_f)`.
pub fn r0_bound(c: &LemmaConstants, alpha: f64, x_e: f64, s_e: f64, neighbors: &[(f64, f64)]) -> f64 {
    let spread: f64 = neighbors.iter().map(|(x, s)| x * s).sum();
    (1.0 - alpha * s_e) * (c.r0_base + c.r0_slope * (s_e + alpha * spread)) * x_e
}

/// Lower bound on `Pr[e matched and R1(e)]`.
pub fn r1_bound(c: &LemmaConstants, alpha: f64, x_e: f64, s_e: f64, m_e: f64, neighbors: &[(f64, f64)]) -> f64 {
    let m = if c.uses_m { m_e } else { 0.0 };
    let mass: f64 = neighbors.iter().map(|(x, s)| x * (1.0 - m - x - s).max(0.0)).sum();
    (1.0 - alpha * s_e) * (1.0 - 2.0 * alpha).powi(2) * mass * c.r1 * x_e
}

pub fn lemma_r0_bound(alpha: f64, x_e: f64, s_e: f64, neighbors: &[(f64, f64)]) -> f64 {
    r0_bound(&Setting::General.constants(), alpha, x_e, s_e, neighbors)
}

pub fn lemma_r1_bound(alpha: f64, x_e: f64, s_e: f64, m_e: f64, neighbors: &[(f64, f64)]) -> f64 {
    r1_bound(&Setting::General.constants(), alpha, x_e, s_e, m_e, neighbors)
}

pub fn patience_r0_bound(alpha: f64, x_e: f64, s_e: f64, neighbors: &[(f64, f64)]) -> f64 {
    r0_bound(&Setting::PatienceGeneral.constants(), alpha, x_e, s_e, neighbors)
}

pub fn patience_r1_bound(alpha: f64, x_e: f64, s_e: f64, m_e: f64, neighbors: &[(f64, f64)]) -> f64 {
    r1_bound(&Setting::PatienceGeneral.constants(), alpha, x_e, s_e, m_e, neighbors)
}

pub fn one_sided_r0_bound(alpha: f64, x_e: f64, s_e: f64, neighbors: &[(f64, f64)]) -> f64 {
    r0_bound(&Setting::PatienceOneSided.constants(), alpha, x_e, s_e, neighbors)
}

pub fn one_sided_r1_bound(alpha: f64, x_e: f64, s_e: f64, neighbors: &[(f64, f64)]) -> f64 {
    r1_bound(&Setting::PatienceOneSided.constants(), alpha, x_e, s_e, 0.0, neighbors)
}

/// `(x_f, s_f)` for every neighbor of edge `e`.
pub fn neighbor_pairs(stats: &[EdgeStats], x: &[f64], e: usize) -> Vec<(f64, f64)> {
    stats[e].neighbors.iter().map(|&f| (x[f], stats[f].s)).collect()
}

/// Both lemma bounds for every edge of an instance, as `(r0, r1)`.
pub fn edge_bounds(setting: Setting, alpha: f64, stats: &[EdgeStats], x: &[f64]) -> Vec<(f64, f64)> {
    let c = setting.constants();
    (0..x.len())
        .map(|e| {
            let n = neighbor_pairs(stats, x, e);
            let st = &stats[e];
            (r0_bound(&c, alpha, x[e], st.s, &n), r1_bound(&c, alpha, x[e], st.s, st.m, &n))
        })
        .collect()
}

#[cfg(test)]
mod tests;
