use approx::assert_abs_diff_eq;

use super::*;
use crate::graph::{generate_family, instance_edge_stats, Family};

#[test]
fn h_examples() {
    assert_abs_diff_eq!(h(2.0).unwrap(), 0.432_332_358_381_693_6, epsilon = 1e-12);
    assert_eq!(h(0.0).unwrap(), 1.0);
    assert_abs_diff_eq!(h(1.0).unwrap(), 1.0 - (-1.0f64).exp(), epsilon = 1e-15);
    assert!(matches!(h(-0.1), Err(Error::Input(_))));
    assert_eq!(h2(), h(2.0).unwrap());
}

#[test]
fn quadrature_examples() {
    let v = quadrature(|y| (-2.0 * y).exp(), 0.0, 1.0, QUAD_TOL).unwrap();
    assert_abs_diff_eq!(v, h2(), epsilon = 1e-10);
    let v = quadrature(|z| (1.0 - z) * (1.0 - z), 0.0, 1.0, QUAD_TOL).unwrap();
    assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-12);
    let v = quadrature(|y| (-4.0 * y).exp() * (1.0 + y).powi(2), 0.0, 1.0, QUAD_TOL).unwrap();
    assert!(v >= 0.382, "{v}");
}

#[test]
fn quadrature_errors_and_self_consistency() {
    assert!(matches!(quadrature(|y| 1.0 / y, 0.0, 1.0, QUAD_TOL), Err(Error::Numeric(_))));
    assert!(matches!(quadrature(|y| y, 0.0, 1.0, 0.0), Err(Error::Input(_))));
    let f = |y: f64| (y * 7.0).sin() * (-y).exp();
    let a = quadrature(f, 0.0, 1.0, QUAD_TOL).unwrap();
    let b = quadrature(f, 0.0, 1.0, QUAD_TOL / 2.0).unwrap();
    assert!((a - b).abs() < QUAD_TOL);
}

#[test]
fn z_examples() {
    assert_abs_diff_eq!(z(0.0).unwrap(), 0.125 - 0.125 * (-4.0f64).exp() - 0.5 * (-2.0f64).exp(), epsilon = 1e-15);
    assert_abs_diff_eq!(z(1e-6).unwrap(), z0(), epsilon = 1e-6);
    let vals: Vec<f64> = (0..=100).map(|i| z(i as f64 / 100.0).unwrap()).collect();
    assert!(vals.iter().all(|&v| v >= 0.055), "{vals:?}");
    // z increases on [0,1], so the minimum sits at x = 0
    assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(matches!(z(1.5), Err(Error::Input(_))));
}

#[test]
fn h1_examples() {
    for x in [0.0, 0.3, 1.0] {
        assert_eq!(h1(0.0, x).unwrap(), 0.0);
    }
    for i in 0..=10 {
        for j in 0..=10 {
            let (a, x) = (i as f64 / 10.0, j as f64 / 10.0);
            assert_abs_diff_eq!(h1(a, x).unwrap(), h1_closed(a, x), epsilon = 1e-9);
        }
    }
    assert!(h1(1.2, 0.0).is_err());
}

#[test]
fn phi_examples() {
    for i in 0..=20 {
        let y = i as f64 / 20.0;
        assert_abs_diff_eq!(phi(Some(2), y), (-y).exp() * (1.0 + y), epsilon = 1e-15);
        assert_eq!(phi(Some(1), y), 1.0);
        assert_eq!(phi(None, y), 1.0);
    }
    for l in 1..=20 {
        assert_eq!(phi(Some(l), 0.0), 1.0);
    }
}

#[test]
fn lemma_bound_examples() {
    assert_abs_diff_eq!(lemma_r0_bound(0.0, 1.0, 1.0, &[]), h2() + 0.14, epsilon = 1e-15);
    let n = [(0.3, 0.1), (0.2, 0.5)];
    let mass: f64 = n.iter().map(|(x, s)| x * (1.0f64 - 0.1 - x - s).max(0.0)).sum();
    assert_abs_diff_eq!(lemma_r1_bound(0.0, 0.7, 0.4, 0.1, &n), mass * 0.0275 * 0.7, epsilon = 1e-15);
    assert_abs_diff_eq!(patience_r0_bound(0.0, 1.0, 1.0, &[]), 0.499, epsilon = 1e-12);
    let mass: f64 = n.iter().map(|(x, s)| x * (1.0f64 - 0.1 - x - s).max(0.0)).sum();
    assert_abs_diff_eq!(patience_r1_bound(0.0, 0.7, 0.4, 0.1, &n), mass * 0.02 * 0.7, epsilon = 1e-15);
    for alpha in [0.0, 0.16, 0.5] {
        assert_abs_diff_eq!(one_sided_r0_bound(alpha, 0.6, 0.0, &[]), 0.405 * 0.6, epsilon = 1e-15);
    }
    // one-sided R1 ignores m
    let a = one_sided_r1_bound(0.1, 0.5, 0.3, &n);
    let b = r1_bound(&Setting::PatienceOneSided.constants(), 0.1, 0.5, 0.3, 0.9, &n);
    assert_eq!(a, b);
}

#[test]
fn tight_path_middle_edge() {
    let g = generate_family(&Family::TightPath3 { n: 100 }).unwrap();
    let x = g.x.unwrap();
    let stats = instance_edge_stats(&g.instance, &x).unwrap();
    let (r0, r1) = edge_bounds(Setting::General, 0.171, &stats, &x)[1];
    assert!(r0 + r1 >= 0.45 * x[1], "{} vs {}", r0 + r1, 0.45 * x[1]);
}

fn cert(setting: Setting) -> BoundCertificate {
    five_var_minimize(setting, setting.default_alpha(), 81, 3).unwrap()
}

#[test]
fn certificates_match_claims() {
    for s in Setting::ALL {
        let c = cert(s);
        assert!((c.minimum - s.claimed()).abs() <= 0.002, "{s:?}: {}", c.minimum);
        assert!(c.minimum <= c.grid_minimum);
        assert!(c.point.violations(1e-12).is_empty());
        if !s.m_free() {
            assert_eq!(c.point.m, 0.0);
        }
    }
}

#[test]
fn certificate_sign_conditions() {
    let c = cert(Setting::General);
    assert!(c.sign_conditions.s_f_ok && c.sign_conditions.small_x_sq_ok);
    let low = five_var_minimize(Setting::General, 0.1, 11, 0).unwrap();
    assert!(!low.sign_conditions.s_f_ok);
}

#[test]
fn certificate_grid_convergence() {
    for s in Setting::ALL {
        let a = five_var_minimize(s, s.default_alpha(), 41, 3).unwrap();
        let b = cert(s);
        assert!((a.minimum - b.minimum).abs() < 1e-3, "{s:?}: {} vs {}", a.minimum, b.minimum);
    }
}

#[test]
fn certificate_rejects_bad_input() {
    assert!(matches!(five_var_minimize(Setting::General, 0.7, 81, 3), Err(Error::Input(_))));
    assert!(matches!(five_var_minimize(Setting::General, 0.171, 1, 3), Err(Error::Input(_))));
}

#[test]
fn bipartite_program_is_the_infimum_of_the_bounds() {
    const TINY: usize = 1_000_000;
    for s in [Setting::Bipartite, Setting::PatienceOneSided] {
        let c = cert(s);
        let p = c.point;
        let k = &c.constants;
        // the minimizer has no big neighbors and x_e = 0; realize it with many
        // tiny neighbors that have no slack, and let x_e shrink
        assert!(p.dbig < 1e-9 && p.x < 1e-9, "{p:?}");
        let n = vec![(p.d / TINY as f64, 0.0); TINY];
        let xe = 1e-9;
        let sum = (r0_bound(k, c.alpha, xe, p.s, &n) + r1_bound(k, c.alpha, xe, p.s, 0.0, &n)) / xe;
        assert!((sum - c.minimum).abs() < 1e-6, "{s:?}: {sum} vs {}", c.minimum);
    }
}

#[test]
fn general_program_overcharges_the_triangle_partner() {
    // x_e -> 0, s_e = 0, a triangle partner with x_f = s_f = m, and the other
    // 2 - m of neighbor mass on tiny edges with s_f = 0
    let k = Setting::General.constants();
    let a = 0.171;
    let q = k.r1 * (1.0 - 2.0 * a) * (1.0 - 2.0 * a);
    let lemma = |m: f64| k.r0_base + k.r0_slope * a * m * m + q * ((2.0 - m) * (1.0 - m) + m * (1.0 - 3.0 * m).max(0.0));
    let best = (0..=10_000).map(|i| lemma(i as f64 / 10_000.0)).fold(f64::INFINITY, f64::min);
    assert!(best < 0.45 - 1e-3, "{best}");
    assert!((best - 0.44725).abs() < 5e-5, "{best}");
}

#[test]
fn cross_validation_on_generators() {
    let general = cert(Setting::General).minimum;
    let families = [
        Family::TightPath3 { n: 100 },
        Family::Star { k: 5 },
        Family::Triangle,
        Family::RandomBipartite { offline: 4, online: 5, density: 0.6, seed: 3 },
        Family::RandomGeneral { n: 7, density: 0.5, seed: 9 },
    ];
    for f in families {
        let g = generate_family(&f).unwrap();
        let x = g.x.unwrap();
        let stats = instance_edge_stats(&g.instance, &x).unwrap();
        let b = edge_bounds(Setting::General, 0.171, &stats, &x);
        let worst = (0..x.len())
            .filter(|&e| x[e] > 0.0)
            .map(|e| (b[e].0 + b[e].1) / x[e])
            .fold(f64::INFINITY, f64::min);
        assert!(worst >= general - 1e-6, "{f:?}: {worst} < {general}");
    }
}

#[test]
fn facts_battery() {
    let rows = verify_facts();
    let by = |id: &str| rows.iter().find(|r| r.id == id).unwrap_or_else(|| panic!("missing {id}"));
    for id in [
        "fact_3_3_concavity",
        "fact_d2_product",
        "h_linear_underestimate",
        "fact_b3_z",
        "fact_c1_patience_r0",
        "fact_c3_one_sided_r0",
        "fact_4_5_patience_r1",
        "fact_c4_one_sided_r1",
        "ell_min_r0_two_sided",
        "ell_min_r0_one_sided",
        "ell_floor_r0_two_sided",
        "ell_floor_r0_one_sided",
        "ell_min_blocking",
    ] {
        let r = by(id);
        assert!(r.holds, "{r:?}");
    }
    // the R1 integrals are smaller at l = 3 than at l = 2
    for id in ["ell_min_r1_two_sided", "ell_min_r1_one_sided"] {
        let r = by(id);
        assert!(!r.holds && r.margin < -1e-3, "{r:?}");
    }
}

#[test]
fn ell_scan_r1_values() {
    let s = ell_scan(|l| quadrature(|a| (-2.0 * a).exp() * h1_closed(a, 0.0) * phi(l, a).powi(2), 0.0, 1.0, QUAD_TOL).unwrap());
    assert_eq!(s.argmin(), Some(3));
    assert_abs_diff_eq!(s.at(Some(2)), 0.18143, epsilon = 5e-5);
    assert_abs_diff_eq!(s.min(), 0.17783, epsilon = 5e-5);
}
