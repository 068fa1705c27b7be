mod common;

use proptest::prelude::*;
use stefan_lab::compat::{derive_compat_operator, derive_compat_operator_with_cap};
use stefan_lab::profile::build_profile;
use stefan_lab::series::Series;

const GOLDEN_K1: &str = "1 * u_{xx}\n1 * u_{yy}\n-1 * u_x·u_x\n-1 * u_y·u_y\n";
const GOLDEN_K2: &str = "1 * u_{xxxx}\n2 * u_{xxyy}\n1 * u_{yyyy}\n-3 * u_{xxx}·u_x\n-3 * u_{xxy}·u_y\n\
-3 * u_{xyy}·u_x\n-3 * u_{yyy}·u_y\n2 * u_{xx}·u_x·u_x\n4 * u_{xy}·u_x·u_y\n2 * u_{yy}·u_y·u_y\n";

#[test]
fn golden_operators() {
    assert_eq!(derive_compat_operator(1).unwrap().to_text(), GOLDEN_K1);
    assert_eq!(derive_compat_operator(2).unwrap().to_text(), GOLDEN_K2);
}

#[test]
fn manufactured_oracle_up_to_third_order() {
    let p = common::sample_polynomial();
    let truth = common::path_derivatives(&p, 3);
    for k in 1..=3 {
        let op = derive_compat_operator(k).unwrap();
        let got = op.evaluate(&common::polynomial_jet(&p, 2 * k)).unwrap();
        assert!((got - truth[k]).abs() <= 1e-6 * truth[k].abs().max(1.0), "k = {k}: {got} vs {}", truth[k]);
    }
}

#[test]
fn structure() {
    for k in 1..=3 {
        let op = derive_compat_operator(k).unwrap();
        assert_eq!(op.max_order(), 2 * k);
        assert!(op.has_laplacian_leading_term());
    }
    assert_eq!(derive_compat_operator(3).unwrap().terms.len(), 40);
    assert!(derive_compat_operator_with_cap(3, 5).is_err());
}

#[test]
fn deterministic_text() {
    assert_eq!(derive_compat_operator(3).unwrap().to_text(), derive_compat_operator(3).unwrap().to_text());
}

#[test]
fn profile_satisfies_conditions_on_the_circle() {
    let b = build_profile(0.25, 2, -1.0).unwrap();
    for k in 1..=2 {
        let op = derive_compat_operator(k).unwrap();
        for phi in [0.0, 1.0, 2.5, 4.0] {
            let p = [2.0 * f64::sin(phi), 2.0 - 2.0 * f64::cos(phi)];
            let r = op.evaluate(&b.u_series(p[0], p[1], 2 * k).unwrap().to_jet()).unwrap();
            assert!(r.abs() < 1e-10, "k = {k}, phi = {phi}: {r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // the conditions are invariant under rotations, so P_k of a rotated
    // polynomial at the origin must not change
    #[test]
    fn rotation_invariance(theta in 0.0f64..6.28) {
        let p = common::sample_polynomial();
        let (c, s) = (theta.cos(), theta.sin());
        let base = Series::var(2, 6, 0, 0.0);
        let yv = Series::var(2, 6, 1, 0.0);
        let xr = &(&base * c) - &(&yv * s);
        let yr = &(&base * s) + &(&yv * c);
        // rotated polynomial as a series, from its monomials
        let mut rot = Series::zeros(2, 6);
        for (&(i, j), &a) in &p {
            let mut m = Series::constant(2, 6, a);
            for _ in 0..i { m = &m * &xr; }
            for _ in 0..j { m = &m * &yr; }
            rot = rot + m;
        }
        for k in 1..=3 {
            let op = derive_compat_operator(k).unwrap();
            let a = op.evaluate(&common::polynomial_jet(&p, 2 * k)).unwrap();
            let b = op.evaluate(&rot.to_jet()).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "k = {}: {} vs {}", k, a, b);
        }
    }
}
