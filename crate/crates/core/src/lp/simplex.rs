//! Dense primal simplex for `max c.y  s.t.  A y <= b, y >= 0` with `b >= 0`.
//!
//! The all-slack basis is feasible for such programs, so no phase one is
//! needed. Entering and leaving variables follow Bland's rule.

use crate::error::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SimplexSolution {
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Reduced costs of the structural variables at the final basis; all are
    /// `<= PIVOT_TOL` at optimality.
    pub reduced_costs: Vec<f64>,
    pub basis: Vec<usize>,
}

/// Solves the program given as sparse rows `(column, coefficient)`.
pub fn maximize(c: &[f64], rows: &[Vec<(usize, f64)>], rhs: &[f64]) -> Result<SimplexSolution> {
    let n = c.len();
    let m = rows.len();
    if rhs.len() != m {
        return Err(Error::Internal("row/rhs length mismatch".into()));
    }
    if let Some(b) = rhs.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
        return Err(Error::Internal(format!("right-hand side {b} must be finite and >= 0")));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Internal("objective has a non-finite coefficient".into()));
    }
    let width = n + m + 1;
    let mut t = vec![0.0; m * width];
    for (i, row) in rows.iter().enumerate() {
        for &(j, a) in row {
            if j >= n {
                return Err(Error::Internal(format!("column {j} out of range")));
            }
            t[i * width + j] += a;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + n + m] = rhs[i];
    }
    // reduced cost row: r_j = c_j - c_B B^-1 A_j; starts at c for the slack basis
    let mut r = vec![0.0; width];
    r[..n].copy_from_slice(c);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 200 * (n + m) + 10_000;
    let mut iterations = 0;
    loop {
        let Some(enter) = (0..n + m).find(|&j| r[j] > PIVOT_TOL) else {
            break;
        };
        if iterations >= max_iter {
            return Err(Error::Internal(format!("simplex exceeded {max_iter} pivots")));
        }
        iterations += 1;

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > PIVOT_TOL {
                let ratio = t[i * width + n + m] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((p, _)) = leave else {
            return Err(Error::Internal("program is unbounded".into()));
        };

        let piv = t[p * width + enter];
        for j in 0..width {
            t[p * width + j] /= piv;
        }
        let pivot_row: Vec<f64> = t[p * width..(p + 1) * width].to_vec();
        for i in 0..m {
            if i == p {
                continue;
            }
            let f = t[i * width + enter];
            if f != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= f * pivot_row[j];
                }
            }
        }
        let f = r[enter];
        for j in 0..width {
            r[j] -= f * pivot_row[j];
        }
        basis[p] = enter;
    }

    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i * width + n + m].max(0.0);
        }
    }
    let objective = c.iter().zip(&y).map(|(a, b)| a * b).sum();
    Ok(SimplexSolution {
        y,
        objective,
        iterations,
        reduced_costs: r[..n].to_vec(),
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_program() {
        // max 3a + 5b s.t. a <= 4, 2b <= 12, 3a + 2b <= 18 -> (2, 6), 36
        let rows = vec![vec![(0, 1.0)], vec![(1, 2.0)], vec![(0, 3.0), (1, 2.0)]];
        let s = maximize(&[3.0, 5.0], &rows, &[4.0, 12.0, 18.0]).unwrap();
        assert_abs_diff_eq!(s.objective, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.y[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.y[1], 6.0, epsilon = 1e-9);
        assert!(s.reduced_costs.iter().all(|&r| r <= PIVOT_TOL));
    }

    #[test]
    fn degenerate_program_terminates() {
        // classic cycling example under the largest-coefficient rule (Beale)
        let c = [0.75, -150.0, 0.02, -6.0];
        let rows = vec![
            vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)],
            vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)],
            vec![(2, 1.0)],
        ];
        let s = maximize(&c, &rows, &[0.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(s.objective, 0.05, epsilon = 1e-9);
    }

    #[test]
    fn unbounded_is_internal_error() {
        let rows = vec![vec![(0, 1.0), (1, -1.0)]];
        assert!(matches!(maximize(&[0.0, 1.0], &rows, &[1.0]), Err(Error::Internal(_))));
    }

    #[test]
    fn negative_objective_keeps_zero() {
        let s = maximize(&[-1.0, -2.0], &[vec![(0, 1.0), (1, 1.0)]], &[1.0]).unwrap();
        assert_eq!(s.y, vec![0.0, 0.0]);
        assert_eq!(s.objective, 0.0);
        assert_eq!(s.iterations, 0);
    }
}
