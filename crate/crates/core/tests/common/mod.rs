#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use stefan_lab::initdata::datum::{DatumParams, InitialDatum};
use stefan_lab::initdata::extension::Transform;
use stefan_lab::initdata::planar::CollarInput;
use stefan_lab::jet::DerivJet;
use stefan_lab::series::Series;

/// Counterexample datum at α = 1/4 with the automatic δ, built once per test binary.
pub fn datum() -> &'static InitialDatum {
    static D: OnceLock<InitialDatum> = OnceLock::new();
    D.get_or_init(|| InitialDatum::build(&DatumParams::new(0.25)).expect("default datum builds"))
}

// ---- manufactured compatibility oracle ----
//
// For a polynomial u₀ the heat flow is u = Σ tⁿ/n! Δⁿu₀. Solving X' = −∇u(X, t)
// from the origin by Picard iteration on truncated t-series gives
// f(t) = u(X(t), t), and the k-th operator must equal k!·[tᵏ]f.

type TSeries = Vec<f64>;

fn mul(a: &[f64], b: &[f64]) -> TSeries {
    let n = a.len();
    let mut c = vec![0.0; n];
    for i in 0..n {
        for j in 0..n - i {
            c[i + j] += a[i] * b[j];
        }
    }
    c
}

/// Bivariate polynomial with t-series coefficients.
type Poly = BTreeMap<(usize, usize), TSeries>;

fn laplacian(p: &BTreeMap<(usize, usize), f64>) -> BTreeMap<(usize, usize), f64> {
    let mut out = BTreeMap::new();
    for (&(i, j), &c) in p {
        if i >= 2 {
            *out.entry((i - 2, j)).or_insert(0.0) += c * (i * (i - 1)) as f64;
        }
        if j >= 2 {
            *out.entry((i, j - 2)).or_insert(0.0) += c * (j * (j - 1)) as f64;
        }
    }
    out
}

fn heat_flow(u0: &BTreeMap<(usize, usize), f64>, order: usize) -> Poly {
    let mut u: Poly = BTreeMap::new();
    let mut term = u0.clone();
    let mut fact = 1.0;
    for n in 0..=order {
        for (&k, &c) in &term {
            u.entry(k).or_insert_with(|| vec![0.0; order + 1])[n] += c / fact;
        }
        term = laplacian(&term);
        fact *= (n + 1) as f64;
    }
    u
}

fn eval(u: &Poly, x: &[f64], y: &[f64]) -> TSeries {
    let n = x.len();
    let mut acc = vec![0.0; n];
    for (&(i, j), c) in u {
        let mut m = c.clone();
        for _ in 0..i {
            m = mul(&m, x);
        }
        for _ in 0..j {
            m = mul(&m, y);
        }
        for k in 0..n {
            acc[k] += m[k];
        }
    }
    acc
}

fn derivative(u: &Poly, axis: usize) -> Poly {
    let mut out = BTreeMap::new();
    for (&(i, j), c) in u {
        let (e, key) = if axis == 0 { (i, (i.wrapping_sub(1), j)) } else { (j, (i, j.wrapping_sub(1))) };
        if e > 0 {
            out.insert(key, c.iter().map(|v| v * e as f64).collect());
        }
    }
    out
}

fn integrate(a: &[f64]) -> TSeries {
    let mut out = vec![0.0; a.len()];
    for k in 1..a.len() {
        out[k] = a[k - 1] / k as f64;
    }
    out
}

/// `d^k/dt^k u(X(t), t)` at t = 0 for k = 0..=order.
pub fn path_derivatives(u0: &BTreeMap<(usize, usize), f64>, order: usize) -> Vec<f64> {
    let u = heat_flow(u0, order);
    let (ux, uy) = (derivative(&u, 0), derivative(&u, 1));
    let mut x = vec![0.0; order + 1];
    let mut y = vec![0.0; order + 1];
    for _ in 0..=order {
        let gx = eval(&ux, &x, &y);
        let gy = eval(&uy, &x, &y);
        x = integrate(&gx.iter().map(|v| -v).collect::<Vec<_>>());
        y = integrate(&gy.iter().map(|v| -v).collect::<Vec<_>>());
    }
    let f = eval(&u, &x, &y);
    let mut fact = 1.0;
    f.iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v * fact
        })
        .collect()
}

/// A fixed polynomial of degree 8 with generic coefficients.
pub fn sample_polynomial() -> BTreeMap<(usize, usize), f64> {
    let mut p = BTreeMap::new();
    for i in 0..=8usize {
        for j in 0..=8 - i {
            let c = (((3 * i + 7 * j + 2) % 11) as f64 - 5.0) / 8.0;
            p.insert((i, j), c / (1 + i + j) as f64);
        }
    }
    p
}

pub fn polynomial_jet(p: &BTreeMap<(usize, usize), f64>, depth: usize) -> DerivJet {
    let fact = |n: usize| (1..=n).product::<usize>() as f64;
    DerivJet::from_fn(depth, |i, j| p.get(&(i, j)).copied().unwrap_or(0.0) * fact(i) * fact(j))
}

// ---- radial test input for the planar extension ----

/// `v = 1 − |p|²` on the unit disk with a collar of width `width`.
pub struct DiskInput {
    pub alpha: f64,
    pub width: f64,
}

impl CollarInput for DiskInput {
    fn transform(&self) -> Transform {
        Transform::new(self.alpha)
    }

    fn v_series(&self, p: [f64; 2], depth: usize) -> Option<Series> {
        let r = p[0].hypot(p[1]);
        if !(r < 1.0 && 1.0 - r <= self.width) {
            return None;
        }
        let x = Series::var(2, depth, 0, p[0]);
        let y = Series::var(2, depth, 1, p[1]);
        Some(1.0 - (&x * &x + &y * &y))
    }

    fn frame(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let r = p[0].hypot(p[1]);
        let n = [-p[0] / r, -p[1] / r];
        [[n[1], -n[0]], n]
    }

    fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        1.0 - p[0].hypot(p[1])
    }

    fn probe_lines(&self) -> Vec<([f64; 2], [f64; 2], f64)> {
        (0..24)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / 24.0;
                let b = [phi.cos(), phi.sin()];
                (b, [-b[0], -b[1]], self.width)
            })
            .collect()
    }
}
