mod common;

use rand::{Rng, SeedableRng};
use stefan_lab::compat::derive_compat_operator;
use stefan_lab::initdata::coeffs::{build_higher_coeffs_with, COLLOCATION_SPACING};
use stefan_lab::initdata::datum::InitialDatum;
use stefan_lab::jet::DerivJet;

fn fact(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

#[test]
fn outer_coefficients() {
    let c = common::datum().coeffs();
    // E₁(0) = −q'(2)
    assert!((c.outer.value(1, 0.0).unwrap() - 1.0).abs() < 1e-14);
    // at x = 0 the boundary is y = G = 0 and r = 2 − y, so E₂(0) = q''(2)/2
    assert!((c.outer.value(2, 0.0).unwrap() - 0.75).abs() < 1e-14);
    for k in 0..=200 {
        let x = -1.0 + k as f64 / 100.0;
        assert!(c.outer.value(1, x).unwrap() >= c.bundle.c_lower - 1e-15, "x = {x}");
    }
}

#[test]
fn e2_matches_first_compat_formula_on_the_circle() {
    let c = common::datum().coeffs();
    for x in [0.0, 0.3, 0.6, -0.85] {
        let g = stefan_lab::geometry::g_circle_series(x, 3);
        let (g1, g2) = (g.coeff(1, 0), 2.0 * g.coeff(2, 0));
        let e1 = c.outer.series(1, x, 1).unwrap();
        let (f, f1) = (e1.coeff(0, 0), e1.coeff(1, 0));
        let want = (g1 * g1 * f * f + f * f + g2 * f + 2.0 * g1 * f1) / (2.0 * (1.0 + g1 * g1));
        assert!((c.outer.value(2, x).unwrap() - want).abs() < 1e-9, "x = {x}");
    }
}

#[test]
fn f_and_h() {
    let d = common::datum();
    let c = d.coeffs();
    assert_eq!(c.e_value(1, 0.0).unwrap(), 1.0);
    assert_eq!(c.e_value(1, 0.9).unwrap(), c.outer.value(1, 0.9).unwrap());
    assert!((c.e_value(2, 0.0).unwrap() - 0.5).abs() < 1e-15);
    let floor = stefan_lab::initdata::coeffs::f_floor(&c.bundle, &c.psi);
    for k in 0..=400 {
        let x = -1.0 + k as f64 / 200.0;
        assert!(c.e_value(1, x).unwrap() >= floor.max(0.0), "x = {x}");
        if x.abs() >= 0.5 {
            assert!((c.e_value(2, x).unwrap() - c.outer.value(2, x).unwrap()).abs() < 1e-9, "x = {x}");
        }
        if x.abs() <= 2.0 * d.delta() {
            let (psi, _) = c.psi.eval(x).unwrap();
            assert!((c.e_value(1, x).unwrap() - psi).abs() < 1e-12, "x = {x}");
        }
    }
}

#[test]
fn first_compat_of_two_term_jet() {
    let d = common::datum();
    let op = derive_compat_operator(1).unwrap();
    for k in 0..64 {
        let x = -1.0 + 2.0 * (k as f64 + 0.5) / 64.0;
        let r = op.evaluate(&d.coeffs().boundary_jet(x, 2).unwrap()).unwrap();
        assert!(r.abs() < 1e-9, "x = {x}: {r:e}");
    }
}

#[test]
fn second_compat_after_collocation() {
    let d = common::datum();
    let op = derive_compat_operator(2).unwrap();
    for k in 0..64 {
        let x = -1.0 + 2.0 * (k as f64 + 0.5) / 64.0;
        let r = op.evaluate(&d.coeffs().boundary_jet(x, 4).unwrap()).unwrap();
        assert!(r.abs() < 1e-7, "x = {x}: {r:e}");
    }
}

#[test]
fn e4_outer_identity_and_overlap() {
    let c = common::datum().coeffs();
    assert_eq!(c.e_value(4, 0.75).unwrap(), c.outer.value(4, 0.75).unwrap());
    for x in [0.5, 0.55, 0.6, -0.52, -0.6] {
        let table = c.tables[0].series(x, 0).unwrap().value();
        assert!((table - c.outer.value(4, x).unwrap()).abs() < 1e-7, "x = {x}");
    }
}

/// Jet of Σ Y^ℓ e_ℓ(x + X) at (x, 1/20) on the flat segment, with e₄(x) replaced.
fn flat_jet(x: f64, e4: f64) -> DerivJet {
    let c = common::datum().coeffs();
    let e: Vec<Vec<f64>> = (0..=4)
        .map(|l| if l == 0 { vec![0.0; 5] } else { c.e_series(l, x, 4 - l).unwrap().coeffs().to_vec() })
        .collect();
    DerivJet::from_fn(4, |i, j| {
        if j == 0 || i + j > 4 {
            return 0.0;
        }
        if j == 4 {
            return fact(4) * e4;
        }
        fact(j) * fact(i) * e[j][i]
    })
}

#[test]
fn e4_at_origin_two_ways() {
    let d = common::datum();
    let c = d.coeffs();
    let e4 = c.e_value(4, 0.0).unwrap();
    assert!((e4 - (-0.763_888_888_888_889)).abs() < 1e-9, "{e4}");

    // second compatibility residual is affine in e₄(0); solve it directly
    let op = derive_compat_operator(2).unwrap();
    let res = |v: f64| op.evaluate(&flat_jet(0.0, v)).unwrap();
    let (r0, r1) = (res(0.0), res(1.0));
    let root = -r0 / (r1 - r0);
    assert!((root - e4).abs() < 1e-6 * e4.abs(), "{root} vs {e4}");

    // collocation at half the node spacing
    let mut fine = c.clone();
    fine.tables.clear();
    build_higher_coeffs_with(&mut fine, COLLOCATION_SPACING / 2.0).unwrap();
    for x in [0.0, 0.13, -0.37] {
        let (a, b) = (fine.e_value(4, x).unwrap(), c.e_value(4, x).unwrap());
        assert!((a - b).abs() < 1e-6 * b.abs().max(1.0), "x = {x}: {a} vs {b}");
    }
}

#[test]
fn boundary_values_and_gradient() {
    let d = common::datum();
    let samples = d.domain().boundary_samples(256).unwrap();
    for s in &samples {
        let j = d.u0_jet(s.point, 1).unwrap();
        assert!(j.value().abs() < 1e-10, "{:?}: {:e}", s.point, j.value());
        let g = j.gradient();
        assert!(g[0].hypot(g[1]) > 0.0);
        // gradient points inward
        assert!(g[0] * s.normal[0] + g[1] * s.normal[1] < 0.0);
    }
    for k in 0..=50 {
        let x = -1.0 + k as f64 / 25.0;
        let y = d.domain().g(x);
        assert!(d.field.value(x, y).unwrap().abs() < 1e-14, "x = {x}");
    }
}

#[test]
fn positive_inside() {
    let d = common::datum();
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let mut n = 0;
    while n < 500 {
        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(0.0..4.0)];
        if !d.domain().contains(p) {
            continue;
        }
        n += 1;
        assert!(d.u0_value(p).unwrap() > 0.0, "{p:?}");
    }
    assert_eq!(d.u0_value([0.0, 0.0]).unwrap(), 0.0);
    assert_eq!(d.u0_value([0.0, 4.5]).unwrap(), 0.0);
}

#[test]
fn normal_derivative_on_flat_segment_is_psi() {
    let d = common::datum();
    let delta = d.delta();
    for k in 0..=40 {
        let x = -delta + 2.0 * delta * k as f64 / 40.0;
        let dy = d.u0_jet([x, 0.05], 1).unwrap().at(0, 1);
        let (psi, _) = d.coeffs().psi.eval(x).unwrap();
        assert!((dy - psi).abs() < 1e-9, "x = {x}: {dy} vs {psi}");
    }
    assert!((d.u0_jet([0.0, 0.05], 1).unwrap().at(0, 1) - 1.0).abs() < 1e-12);
}

#[test]
fn outside_bottom_strip_is_u() {
    let d = common::datum();
    let b = &d.coeffs().bundle;
    for p in [[1.2, 0.6], [-1.5, 1.0], [0.1, 3.99], [1.9, 2.0]] {
        let r = ((p[0] as f64).powi(2) + (p[1] - 2.0f64).powi(2)).sqrt();
        if r < 2.0 - d.eps0 {
            continue;
        }
        assert_eq!(d.field.value(p[0], p[1]).unwrap(), b.u_value(p[0], p[1]));
    }
    // on the retained part of the arc collar u₀ = U exactly
    let phi: f64 = 2.0;
    let r = 2.0 - 1e-6;
    let p = [r * phi.sin(), 2.0 - r * phi.cos()];
    assert!(d.retains(p));
    assert_eq!(d.u0_value(p).unwrap(), b.u_value(p[0], p[1]));
}

#[test]
fn seam_continuity() {
    let d = common::datum();
    let b = &d.coeffs().bundle;
    for x in [-1.0, 1.0, -0.5, 0.5] {
        let g = d.domain().g(x);
        for off in [1e-6, 1e-4, 1e-2] {
            let y = g + off;
            let e = d.field.expansion_series(x, y, 2).unwrap().to_jet();
            let u = b.u_series(x, y, 2).unwrap().to_jet();
            for i in 0..=2 {
                for j in 0..=2 - i {
                    let (a, c) = (e.at(i, j), u.at(i, j));
                    assert!((a - c).abs() < 1e-8 * c.abs().max(1.0), "({x}, {y}) d({i},{j}): {a} vs {c}");
                }
            }
        }
    }
}

#[test]
fn jets_match_richardson_differences() {
    let d = common::datum();
    let v = |x: f64, y: f64| d.field.value(x, y).unwrap();
    let diffs = |x: f64, y: f64, h: f64| {
        let fx = (v(x + h, y) - v(x - h, y)) / (2.0 * h);
        let fy = (v(x, y + h) - v(x, y - h)) / (2.0 * h);
        let fxx = (v(x + h, y) - 2.0 * v(x, y) + v(x - h, y)) / (h * h);
        let fyy = (v(x, y + h) - 2.0 * v(x, y) + v(x, y - h)) / (h * h);
        let fxy = (v(x + h, y + h) - v(x + h, y - h) - v(x - h, y + h) + v(x - h, y - h)) / (4.0 * h * h);
        [fx, fy, fxx, fxy, fyy]
    };
    for x in [0.0, 0.17, -0.3, 0.41, 0.8] {
        let y = d.domain().g(x) + 0.02;
        let j = d.field.series(x, y, 2).unwrap().to_jet();
        let exact = [j.at(1, 0), j.at(0, 1), j.at(2, 0), j.at(1, 1), j.at(0, 2)];
        let (a, b) = (diffs(x, y, 1e-3), diffs(x, y, 5e-4));
        for k in 0..5 {
            let rich = (4.0 * b[k] - a[k]) / 3.0;
            let scale = exact[k].abs().max(1e-2);
            assert!((rich - exact[k]).abs() < 1e-5 * scale, "x = {x}, entry {k}: {rich} vs {}", exact[k]);
        }
    }
}

#[test]
fn collar_inequalities_hold() {
    let d = common::datum();
    let scan = d.collar_scan.expect("automatic ε₀ records its scan");
    assert!(scan.passes(1e-6));
    assert!(scan.fitted_a() > 0.0);
    assert!(scan.yy_max < 0.0);
}

#[test]
fn json_round_trip() {
    let d = common::datum();
    let back = InitialDatum::from_json(&d.to_json().unwrap()).unwrap();
    for p in [[0.0, 0.05 + 1e-5], [0.3, 0.5], [1.0, 0.3], [0.0, 2.0], [-1.7, 2.5]] {
        assert_eq!(d.u0_value(p).unwrap(), back.u0_value(p).unwrap(), "{p:?}");
    }
    let j1 = d.u0_jet([0.1, 0.05], 4).unwrap();
    let j2 = back.u0_jet([0.1, 0.05], 4).unwrap();
    assert_eq!(j1, j2);
    let mut bundle = d.to_bundle();
    bundle.format_version += 1;
    assert!(InitialDatum::from_bundle(bundle).is_err());
}

#[test]
fn sample_export() {
    let d = common::datum();
    let csv = d.sample_csv(8, 8).unwrap();
    assert!(csv.starts_with("x,y,u0\n"));
    assert_eq!(csv.lines().count(), 65);
}
