mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use stefan_lab::compat::derive_compat_operator;
use stefan_lab::profile::{build_profile, build_profile_seeded};
use stefan_lab::psi::{
    choose_delta, convergence_order, initial_slope, integrate, second_derivative, solve_psi, DEFAULT_STEP,
};
use stefan_lab::series::Series;

// ---- ψ ----

#[test]
fn psi_initial_values() {
    for alpha in [0.0, 0.25, 0.4] {
        let sol = solve_psi(alpha, 0.1, DEFAULT_STEP).unwrap();
        let s = sol.samples[sol.origin];
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!((s[1] - (2.0 / (1.0 - 2.0 * alpha)).sqrt()).abs() < 1e-12);
        assert!((second_derivative(alpha, s[0], s[1]) - 1.0 / 3.0).abs() < 1e-12);
    }
    assert!((initial_slope(0.0) - 1.414_213_6).abs() < 1e-7);
}

#[test]
fn psi_at_tenth_regression() {
    // Richardson on RK4 with n and 2n steps
    let rich = |n: usize| {
        let a = integrate(0.0, 0.1, n)[0];
        let b = integrate(0.0, 0.1, 2 * n)[0];
        b + (b - a) / 15.0
    };
    let (p1, p2) = (rich(50), rich(100));
    assert!((p1 - p2).abs() < 1e-10, "{p1} vs {p2}");
    assert!((p2 - 1.143_113_769_701_44).abs() < 1e-12, "{p2}");
}

#[test]
fn integrator_order() {
    for alpha in [0.0, 0.25, 0.4] {
        let p = convergence_order(alpha, 0.25, 20);
        assert!((3.8..=4.2).contains(&p), "alpha = {alpha}: order {p}");
    }
}

#[test]
fn ode_residual_from_samples() {
    for alpha in [0.0, 0.25, 0.45] {
        let delta = choose_delta(alpha).unwrap();
        let sol = solve_psi(alpha, delta, DEFAULT_STEP).unwrap();
        let b = 2.0 / 3.0 * (1.0 - 2.0 * alpha);
        let h = sol.step;
        let d = |i: usize| sol.samples[i][1];
        for i in 2..sol.samples.len() - 2 {
            let [psi, dpsi] = sol.samples[i];
            let d2 = (d(i - 2) - 8.0 * d(i - 1) + 8.0 * d(i + 1) - d(i + 2)) / (12.0 * h);
            let res = psi * d2 - b * dpsi * dpsi + 1.0;
            assert!(res.abs() < 1e-8, "alpha = {alpha}, x = {}: {res:e}", sol.x_at(i));
        }
    }
}

/// Margins by an independent fine RK4 sweep over [−2δ, 2δ].
fn margins(alpha: f64, delta: f64) -> (f64, f64) {
    let n = 4000;
    let mut m = (f64::INFINITY, f64::INFINITY);
    for sign in [1.0, -1.0] {
        for k in 0..=n {
            let [p, dp] = integrate(alpha, sign * 2.0 * delta * k as f64 / n as f64, k.max(1));
            m.0 = m.0.min(p);
            m.1 = m.1.min(second_derivative(alpha, p, dp));
        }
    }
    m
}

#[test]
fn delta_selection() {
    // the largest grid value below 1/4 already satisfies the margins at α = 0
    assert_eq!(choose_delta(0.0).unwrap(), 0.24);
    let (m0, m2) = margins(0.0, 0.24);
    assert!(m0 >= 0.1 && m2 >= 0.05, "{m0} {m2}");
    let (_, m2) = margins(0.0, 0.20);
    assert!(m2 > 0.05);
    assert_eq!(choose_delta(0.25).unwrap(), 0.22);
    let d = choose_delta(0.45).unwrap();
    assert!(d >= 0.02 && d < 0.25);
    let (m0, m2) = margins(0.45, d);
    assert!(m0 >= 0.1 && m2 >= 0.05);
    for alpha in [0.0, 0.1, 0.3, 0.49] {
        assert!(choose_delta(alpha).unwrap() < 0.25);
    }
}

#[test]
fn margins_shrink_with_delta() {
    for alpha in [0.0, 0.3] {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for k in 1..=12 {
            let Ok(sol) = solve_psi(alpha, 0.02 * k as f64, DEFAULT_STEP) else { break };
            let m = sol.margins();
            assert!(m.0 <= prev.0 + 1e-15 && m.1 <= prev.1 + 1e-15, "alpha = {alpha}, k = {k}");
            prev = m;
        }
    }
}

#[test]
fn psi_rejects_bad_arguments() {
    assert!(solve_psi(0.5, 0.1, DEFAULT_STEP).is_err());
    assert!(solve_psi(0.2, 0.3, DEFAULT_STEP).is_err());
    assert!(solve_psi(0.2, 0.1, 0.0).is_err());
}

#[test]
fn psi_csv_header() {
    let sol = solve_psi(0.0, 0.02, 1e-2).unwrap();
    let csv = sol.to_csv();
    assert!(csv.starts_with("x,psi,dpsi\n"));
    assert_eq!(csv.lines().count(), sol.samples.len() + 1);
}

// ---- radial profile ----

/// Monomial coefficients of the degree-4 Taylor polynomial of q(r) about
/// the boundary point (0, 0), where r = |(x, y) − (0, 2)|.
fn u_polynomial(q: &[f64]) -> BTreeMap<(usize, usize), f64> {
    let x = Series::var(2, 4, 0, 0.0);
    let y = Series::var(2, 4, 1, 0.0);
    let r = (&x * &x + (&y - 2.0).square()).sqrt();
    let taylor: Vec<f64> = q.iter().enumerate().map(|(k, c)| c / (1..=k).product::<usize>() as f64).collect();
    let u = r.compose(&taylor, true);
    let mut p = BTreeMap::new();
    for i in 0..=4 {
        for j in 0..=4 - i {
            p.insert((i, j), u.coeff(i, j));
        }
    }
    p
}

#[test]
fn fourth_coefficient_by_two_methods() {
    let b = build_profile(0.25, 2, -1.0).unwrap();
    assert_eq!(b.boundary_coeffs[..3], [0.0, -1.0, 1.5]);
    assert!((b.boundary_coeffs[4] - (-5.5)).abs() < 1e-12, "{}", b.boundary_coeffs[4]);

    // second time derivative of u along the moving boundary point, from the
    // heat flow of the truncated polynomial; affine in q⁗(2)
    let f = |q4: f64| common::path_derivatives(&u_polynomial(&[0.0, -1.0, 1.5, 0.0, q4]), 2)[2];
    let (f0, f1) = (f(0.0), f(1.0));
    let root = -f0 / (f1 - f0);
    assert!((root - b.boundary_coeffs[4]).abs() < 1e-6 * root.abs(), "{root}");
    assert!(f(root).abs() < 1e-9);
    // first derivative vanishes for every q⁗
    assert!(common::path_derivatives(&u_polynomial(&[0.0, -1.0, 1.5, 0.0, 3.0]), 1)[1].abs() < 1e-12);
}

#[test]
fn compat_residuals_on_boundary_circle() {
    let b = build_profile(0.25, 2, -1.0).unwrap();
    for k in 1..=2 {
        let op = derive_compat_operator(k).unwrap();
        for s in 0..64 {
            let phi = 2.0 * std::f64::consts::PI * s as f64 / 64.0;
            let p = [2.0 * phi.sin(), 2.0 - 2.0 * phi.cos()];
            let r = op.evaluate(&b.u_series(p[0], p[1], 2 * k).unwrap().to_jet()).unwrap();
            assert!(r.abs() < 1e-10, "k = {k}, phi = {phi}: {r:e}");
        }
    }
}

#[test]
fn profile_invariants() {
    for alpha in [0.0, 0.25, 0.4] {
        let b = build_profile(alpha, 2, -1.0).unwrap();
        let c = &b.boundary_coeffs;
        assert_eq!(c[0], 0.0);
        assert!(c[1] < 0.0);
        assert!(c[2] + 0.5 * c[1] > 0.0);
        assert!(b.c_lower > 0.0);
        assert!(b.collar_width >= 1e-3);
        assert_eq!(b.eval_q(2.0, 0).unwrap(), 0.0);
        assert!(b.eval_q(2.0 - b.collar_width / 2.0, 0).unwrap() > 0.0);
        for k in 1..100 {
            let r = 2.0 - b.collar_width * k as f64 / 100.0;
            let w = b.w_poly(r);
            assert!(w[1] < 0.0 && w[2] < 0.0, "alpha = {alpha}, r = {r}: {w:?}");
            if r >= b.retained_radius() {
                assert!(b.check_radial_concavity(r, alpha).unwrap(), "alpha = {alpha}, r = {r}");
            }
        }
    }
    let b0 = build_profile(0.0, 2, -1.0).unwrap();
    assert!(b0.check_radial_concavity(2.0 - b0.collar_width / 4.0, 0.0).unwrap());
    assert!(b0.check_radial_concavity(0.0, 0.0).is_err());
}

#[test]
fn radial_concavity_matches_fd_hessian() {
    let alpha = 0.4;
    let b = build_profile(alpha, 2, -1.0).unwrap();
    let f = |x: f64, y: f64| b.u_value(x, y).powf(alpha);
    let (x, y, h) = (0.0, 2.0 - 1.9, 1e-4);
    let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
    let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
    let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
    let m = 0.5 * (fxx + fyy);
    let lmax = m + (0.25 * (fxx - fyy).powi(2) + fxy * fxy).sqrt();
    assert_eq!(b.check_radial_concavity(1.9, alpha).unwrap(), lmax < 0.0, "{lmax}");
}

#[test]
fn chain_rule_hessian_against_fd() {
    let b = build_profile(0.25, 2, -1.0).unwrap();
    let h = 1e-4;
    for (x, y) in [(0.3, 0.2), (-0.8, 0.9), (1.2, 2.5), (0.0, 3.8)] {
        let r = (x * x + (y - 2.0f64).powi(2)).sqrt();
        if r < b.retained_radius() {
            continue;
        }
        let (q1, q2) = (b.eval_q(r, 1).unwrap(), b.eval_q(r, 2).unwrap());
        let f = |x: f64, y: f64| b.u_value(x, y);
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        let det_fd = fxx * fyy - fxy * fxy;
        let det = q1 * q2 / r;
        assert!((det_fd - det).abs() < 1e-6 * det.abs().max(1e-2), "({x}, {y}): {det_fd} vs {det}");
        let lap = q2 + q1 / r;
        assert!((fxx + fyy - lap).abs() < 1e-6 * lap.abs().max(1.0));
    }
}

#[test]
fn profile_json_round_trip() {
    let b = build_profile(0.25, 2, -1.0).unwrap();
    let back: stefan_lab::profile::ProfileBundle = serde_json::from_str(&b.to_json().unwrap()).unwrap();
    assert_eq!(b, back);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scaling_law(seed in 1.05f64..4.0, q1 in -2.0f64..-0.3) {
        let b = build_profile_seeded(0.25, 1, q1, seed).unwrap();
        let lam = b.scaling;
        // λ·(q̂'' + q̂'/2) − λ²·q̂'² = 0
        let lap = seed + 0.5 * q1;
        let grad = q1 * q1;
        prop_assert!((lam * lap - lam * lam * grad).abs() < 1e-12 * (1.0 + lam * lap));
        prop_assert!((b.boundary_coeffs[1] - lam * q1).abs() < 1e-15);
        prop_assert!((b.boundary_coeffs[2] - lam * seed).abs() < 1e-14 * lam * seed);
        prop_assert!(b.first_compat_residual().abs() < 1e-12);
    }
}
