mod common;

use proptest::prelude::*;
use stefan_lab::concavity::{concavity_matrix, fd_jet, grid_points, scan, ConcavityMatrix, TOL_ANALYTIC};
use stefan_lab::harness::collar_scan;
use stefan_lab::jet::DerivJet;

fn jet(v: f64, g: [f64; 2], h: [f64; 3]) -> DerivJet {
    DerivJet::from_entries(2, &[((0, 0), v), ((1, 0), g[0]), ((0, 1), g[1]), ((2, 0), h[0]), ((1, 1), h[1]), ((0, 2), h[2])])
}

fn matrix(m11: f64, m12: f64, m22: f64) -> ConcavityMatrix {
    ConcavityMatrix { m11, m12, m22, alpha: 0.0, location: [0.0; 2] }
}

#[test]
fn textbook_matrices() {
    let m = concavity_matrix(&jet(1.0, [0.0, 0.0], [-1.0, 0.0, -1.0]), 0.3, [0.0; 2]).unwrap();
    assert_eq!((m.m11, m.m12, m.m22), (-1.0, 0.0, -1.0));
    let m = concavity_matrix(&jet(1.0, [0.0, 0.0], [2.0, 0.0, 0.0]), 0.3, [0.0; 2]).unwrap();
    assert_eq!(m.m11, 2.0);
    assert!(!m.is_nsd(0.0));
    assert!(matrix(0.0, 0.0, 0.0).is_nsd(0.0));
    assert!(matrix(-1.0, 0.0, -1.0).is_nsd(0.0));
    let m = matrix(-1.0, 2.0, -1.0);
    assert_eq!(m.det(), -3.0);
    assert!(!m.is_nsd(0.0));
    assert_eq!(m.eigenvalues(), [-3.0, 1.0]);
}

#[test]
fn fd_eigenvalues_at_collar_point() {
    let d = common::datum();
    let value = |p: [f64; 2]| d.u0_value(p);
    for x in [0.0, 0.1, 0.35] {
        let p = [x, d.domain().g(x) + 1e-7];
        assert!(d.retains(p));
        let exact = concavity_matrix(&d.u0_jet(p, 2).unwrap(), 0.25, p).unwrap().eigenvalues();
        let fd = concavity_matrix(&fd_jet(value, p, 1e-8).unwrap(), 0.25, p).unwrap().eigenvalues();
        let scale = exact[0].abs().max(exact[1].abs());
        for k in 0..2 {
            assert!((exact[k] - fd[k]).abs() < 1e-5 * scale, "x = {x}: {exact:?} vs {fd:?}");
        }
    }
}

#[test]
fn stronger_alpha_violated_near_flat_segment() {
    let d = common::datum();
    let r = collar_scan(d, 0.6, 1.0 / 256.0, TOL_ANALYTIC).unwrap();
    assert!(r.violated, "{r:?}");
    // x-concavity of v^α' fails where ψ'' > 0 pushes against the flat boundary
    assert!(r.worst_location[0].abs() <= 2.0 * d.delta(), "{:?}", r.worst_location);
    let ok = collar_scan(d, 0.25, 1.0 / 256.0, TOL_ANALYTIC).unwrap();
    assert!(!ok.violated, "{ok:?}");
}

#[test]
fn concave_paraboloid_scan() {
    // q(r) = 4 − r² about the origin: α = 1 concavity is plain concavity
    let pts = grid_points([-2.0, 2.0, -2.0, 2.0], 1.0 / 64.0, |p| p[0].hypot(p[1]) < 1.9, |_| 1.0, 0.0);
    let r = scan(
        |p| Ok(jet(4.0 - p[0] * p[0] - p[1] * p[1], [-2.0 * p[0], -2.0 * p[1]], [-2.0, 0.0, -2.0])),
        &pts,
        1.0,
        TOL_ANALYTIC,
        "disk r < 1.9",
    )
    .unwrap();
    assert!(!r.violated);
    assert!(r.worst_eigenvalue < 0.0);
    assert_eq!(r.n_points, pts.len());
    let json = r.to_json().unwrap();
    assert!(json.contains("\"worst_eigenvalue\""));
}

#[test]
fn scan_is_deterministic() {
    let pts: Vec<[f64; 2]> = (0..50).map(|k| [k as f64 * 0.01, 0.5]).collect();
    let f = |p: [f64; 2]| Ok(jet(1.0, [0.0; 2], [p[0] - 0.2, 0.0, -1.0]));
    let a = scan(f, &pts, 0.2, TOL_ANALYTIC, "line").unwrap();
    let b = scan(f, &pts, 0.2, TOL_ANALYTIC, "line").unwrap();
    assert_eq!(a, b);
    assert!(a.violated);
    assert_eq!(a.worst_location, [0.49, 0.5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn transform_equivalence(
        v in 0.01f64..5.0,
        g in prop::array::uniform2(-3.0f64..3.0),
        h in prop::array::uniform3(-3.0f64..3.0),
        alpha in 0.0f64..0.5,
    ) {
        let m = concavity_matrix(&jet(v, g, h), alpha, [0.0; 2]).unwrap();
        // Hessian of v^α, or of log v at α = 0, by the chain rule
        let (a, b) = if alpha > 0.0 {
            (alpha * v.powf(alpha - 1.0), alpha * (alpha - 1.0) * v.powf(alpha - 2.0))
        } else {
            (1.0 / v, -1.0 / (v * v))
        };
        let t = matrix(a * h[0] + b * g[0] * g[0], a * h[1] + b * g[0] * g[1], a * h[2] + b * g[1] * g[1]);
        let norm = m.m11.abs() + m.m22.abs() + m.m12.abs();
        prop_assume!(m.det().abs() > 1e-9 * norm * norm && m.m11.abs() > 1e-9 * norm && m.m22.abs() > 1e-9 * norm);
        prop_assert_eq!(m.is_nsd(0.0), t.is_nsd(0.0));
    }

    #[test]
    fn scale_invariance(
        v in 1i32..20,
        g in prop::array::uniform2(-20i32..20),
        h in prop::array::uniform3(-20i32..20),
        lam in 1i32..50,
    ) {
        let f = |x: i32| x as f64;
        let base = jet(f(v), [f(g[0]), f(g[1])], [f(h[0]), f(h[1]), f(h[2])]);
        let m = concavity_matrix(&base, 0.25, [0.0; 2]).unwrap();
        let ms = concavity_matrix(&base.scaled(f(lam)), 0.25, [0.0; 2]).unwrap();
        // small integers times 1/4: every product is exact
        let l2 = f(lam * lam);
        prop_assert_eq!(ms.m11, l2 * m.m11);
        prop_assert_eq!(ms.m12, l2 * m.m12);
        prop_assert_eq!(ms.m22, l2 * m.m22);
        prop_assert_eq!(m.is_nsd(0.0), ms.is_nsd(0.0));
    }
}
