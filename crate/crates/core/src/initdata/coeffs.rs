//! Coefficients of the collar expansion `v = Σ (y−g)^ℓ e_ℓ + (y−g)^{2N+1} R`.
//!
//! `E_ℓ` are the Taylor coefficients of U in `ỹ = y − G(x)`. Since
//! `r² = 4 − 2sỹ + ỹ²` with `s = √(4 − x²)`, every `E_ℓ` is an explicit
//! function of `s`, tabulated here with its x-derivatives. `f` blends ψ into
//! `E₁`, `h` is fixed by the first compatibility condition, odd `e_ℓ` copy
//! `E_ℓ` and even `e_{2k}`, k ≥ 2, come from the k-th condition solved on a
//! collocation grid.

use serde::{Deserialize, Serialize};

use crate::compat::derive_compat_operator;
use crate::error::{Error, Result};
use crate::geometry::{smooth_step_series, DomainSpec};
use crate::jet::DerivJet;
use crate::profile::ProfileBundle;
use crate::psi::PsiSolution;
use crate::series::{factorial, Series};

/// Number of Taylor terms of U in ỹ kept beyond order 2N+1 for the remainder.
pub const REMAINDER_TERMS: usize = 12;
const OUTER_HALF: f64 = 1.05;
const OUTER_SPACING: f64 = 0.01;
const OUTER_DX: usize = 18;
pub const COLLOCATION_HALF: f64 = 0.6;
pub const COLLOCATION_SPACING: f64 = 5e-4;
pub const COLLOCATION_DEGREE: usize = 12;
pub const OVERLAP_TOL: f64 = 1e-7;

/// `U(x + ξ, G(x + ξ) + ỹ)` as a bivariate series in (ξ, ỹ).
pub fn outer_bivariate(bundle: &ProfileBundle, x: f64, depth: usize) -> Series {
    let xs = Series::var(2, depth, 0, x);
    let s = (4.0 - &xs * &xs).sqrt();
    let yt = Series::var(2, depth, 1, 0.0);
    let rho = (4.0 - 2.0 * &s * &yt + &yt * &yt).sqrt();
    rho.compose(&bundle.taylor_coeffs(), true)
}

/// `E_ℓ` for ℓ ≤ lmax at the nodes `x_j = −1.05 + j/100`, each as Taylor
/// coefficients in the offset from the node.
#[derive(Clone, Debug, Default)]
pub struct OuterTable {
    lmax: usize,
    nodes: Vec<Vec<Vec<f64>>>,
}

impl OuterTable {
    pub fn build(bundle: &ProfileBundle, lmax: usize) -> Self {
        let n = (2.0 * OUTER_HALF / OUTER_SPACING).round() as usize;
        let depth = lmax + OUTER_DX;
        let nodes = (0..=n)
            .map(|j| {
                let x = -OUTER_HALF + j as f64 * OUTER_SPACING;
                let b = outer_bivariate(bundle, x, depth);
                (0..=lmax).map(|l| (0..=depth - l).map(|i| b.coeff(i, l)).collect()).collect()
            })
            .collect();
        OuterTable { lmax, nodes }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn series(&self, l: usize, x: f64, degree: usize) -> Result<Series> {
        if l > self.lmax {
            return Err(Error::Depth { requested: l, available: self.lmax });
        }
        if !(x.abs() <= OUTER_HALF) {
            return Err(Error::InvalidParameter(format!("E_{l} tabulated on |x| ≤ {OUTER_HALF}, got {x}")));
        }
        let j = ((x + OUTER_HALF) / OUTER_SPACING).round() as usize;
        let c = &self.nodes[j][l];
        if degree + 1 > c.len() {
            return Err(Error::Depth { requested: degree, available: c.len() - 1 });
        }
        let xj = -OUTER_HALF + j as f64 * OUTER_SPACING;
        Ok(Series::from_coeffs(c.clone()).recentered_to(x - xj, degree))
    }

    pub fn value(&self, l: usize, x: f64) -> Result<f64> {
        Ok(self.series(l, x, 0)?.value())
    }
}

/// Transition windows of f on each side: f = ψ between the windows and
/// f = E₁ outside them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FBlend {
    /// φ = 1 for x ≤ left[0], φ = 0 for x ≥ left[1].
    pub left: [f64; 2],
    /// φ = 0 for x ≤ right[0], φ = 1 for x ≥ right[1].
    pub right: [f64; 2],
}

impl FBlend {
    pub fn validate(&self, delta: f64) -> Result<()> {
        let [a, b] = self.left;
        let [c, d] = self.right;
        let ok = -0.5 <= a && a < b && b <= -2.0 * delta && 2.0 * delta <= c && c < d && d <= 0.5;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "blend windows {:?} {:?} must lie in [-1/2, -2δ] and [2δ, 1/2] for δ = {delta}",
                self.left, self.right
            )));
        }
        Ok(())
    }

    /// Weight of E₁ as a series about x.
    pub fn weight(&self, x: f64, degree: usize) -> Series {
        let xs = Series::var(1, degree, 0, x);
        if x < 0.0 {
            let [a, b] = self.left;
            smooth_step_series(&((b - &xs) * (1.0 / (b - a))))
        } else {
            let [c, d] = self.right;
            smooth_step_series(&((&xs - c) * (1.0 / (d - c))))
        }
    }
}

/// Piecewise Taylor table on equally spaced nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseTaylor {
    pub x0: f64,
    pub spacing: f64,
    pub coeffs: Vec<Vec<f64>>,
}

impl PiecewiseTaylor {
    pub fn node(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.spacing
    }

    pub fn series(&self, x: f64, degree: usize) -> Result<Series> {
        let t = (x - self.x0) / self.spacing;
        if t < -0.5 || t > self.coeffs.len() as f64 - 0.5 {
            return Err(Error::InvalidParameter(format!("x = {x} outside the collocation table")));
        }
        let j = (t.round() as usize).min(self.coeffs.len() - 1);
        let c = &self.coeffs[j];
        if degree + 1 > c.len() {
            return Err(Error::Depth { requested: degree, available: c.len() - 1 });
        }
        Ok(Series::from_coeffs(c.clone()).recentered_to(x - self.node(j), degree))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffKind {
    /// f = e₁.
    Blend,
    /// h = e₂ from the first compatibility condition.
    FirstCompat,
    /// e_ℓ = E_ℓ.
    Outer,
    /// Collocated solution of a higher compatibility condition.
    Collocated,
}

#[derive(Clone, Debug)]
pub struct CoeffSet {
    pub n: usize,
    pub alpha: f64,
    pub bundle: ProfileBundle,
    pub domain: DomainSpec,
    /// ψ on the range where f uses it (wider than [−2δ, 2δ]).
    pub psi: PsiSolution,
    pub blend: FBlend,
    /// e₄, e₆, … on [−0.6, 0.6].
    pub tables: Vec<PiecewiseTaylor>,
    pub outer: OuterTable,
}

impl CoeffSet {
    pub fn kind(&self, l: usize) -> CoeffKind {
        match l {
            1 => CoeffKind::Blend,
            2 => CoeffKind::FirstCompat,
            l if l % 2 == 1 => CoeffKind::Outer,
            _ => CoeffKind::Collocated,
        }
    }

    pub fn f_series(&self, x: f64, degree: usize) -> Result<Series> {
        if !(x.abs() <= OUTER_HALF) {
            return Err(Error::InvalidParameter(format!("f is defined on [-1, 1], got {x}")));
        }
        let w = if x.abs() >= 0.5 { Series::constant(1, degree, 1.0) } else { self.blend.weight(x, degree) };
        let w0 = w.value();
        if w0 == 1.0 && w.coeffs()[1..].iter().all(|&c| c == 0.0) {
            return self.outer.series(1, x, degree);
        }
        let psi = self.psi.taylor(x, degree)?;
        if w0 == 0.0 && w.coeffs()[1..].iter().all(|&c| c == 0.0) {
            return Ok(psi);
        }
        let e1 = self.outer.series(1, x, degree)?;
        Ok(&psi + &(&w * &(&e1 - &psi)))
    }

    /// h from f and g through the first compatibility condition.
    pub fn h_series(&self, x: f64, degree: usize) -> Result<Series> {
        let f = self.f_series(x, degree + 1)?;
        let f1 = f.diff(0);
        let g1 = self.domain.g_series(x, degree + 2).diff(0);
        let g2 = g1.diff(0);
        let q = 1.0 + &g1 * &g1;
        let num = &q * &f * &f + &g2 * &f + 2.0 * &g1 * &f1;
        Ok((&num / &(2.0 * &q)).truncated(degree))
    }

    pub fn e_series(&self, l: usize, x: f64, degree: usize) -> Result<Series> {
        match self.kind(l) {
            CoeffKind::Blend => self.f_series(x, degree),
            CoeffKind::FirstCompat => self.h_series(x, degree),
            CoeffKind::Outer => self.outer.series(l, x, degree),
            CoeffKind::Collocated => {
                if x.abs() >= 0.5 {
                    self.outer.series(l, x, degree)
                } else {
                    self.tables[l / 2 - 2].series(x, degree)
                }
            }
        }
    }

    pub fn e_value(&self, l: usize, x: f64) -> Result<f64> {
        Ok(self.e_series(l, x, 0)?.value())
    }

    /// Derivatives of `v` at (x, g(x)); exact up to order 2N.
    pub fn boundary_jet(&self, x: f64, depth: usize) -> Result<DerivJet> {
        Ok(self.partial_sum(x, depth, 2 * self.n)?.to_jet())
    }

    /// `Σ_{ℓ≤lmax} (Y − Δg(X))^ℓ e_ℓ(x + X)` about the boundary point over x.
    fn partial_sum(&self, x: f64, depth: usize, lmax: usize) -> Result<Series> {
        let mut dg = self.domain.g_series(x, depth);
        dg.set_coeff(0, 0, 0.0);
        let t = Series::var(2, depth, 1, 0.0) - dg.lift(0);
        let mut acc = Series::zeros(2, depth);
        for l in (1..=lmax.min(depth)).rev() {
            let e = self.e_series(l, x, depth - l)?;
            let mut el = Series::zeros(2, depth);
            for (i, &c) in e.coeffs().iter().enumerate() {
                el.set_coeff(i, 0, c);
            }
            acc = &t * &(acc + el);
        }
        Ok(acc)
    }
}

/// Builds e_{2k} for k = 2..N at the collocation nodes and appends each
/// table to `set`. Nodes with |x| ≥ 1/2 are checked against E_{2k}.
pub fn build_higher_coeffs(set: &mut CoeffSet) -> Result<()> {
    build_higher_coeffs_with(set, COLLOCATION_SPACING)
}

pub fn build_higher_coeffs_with(set: &mut CoeffSet, spacing: f64) -> Result<()> {
    set.tables.clear();
    let nodes = (2.0 * COLLOCATION_HALF / spacing).round() as usize;
    for k in 2..=set.n {
        let op = derive_compat_operator(k)?;
        let dk = COLLOCATION_DEGREE + 2 * (set.n - k);
        let total = 2 * k + dk;
        let mut coeffs = Vec::with_capacity(nodes + 1);
        for j in 0..=nodes {
            let x = -COLLOCATION_HALF + j as f64 * spacing;
            let e = solve_node(set, &op, k, x, dk, total)?;
            if x.abs() >= 0.5 - 1e-12 {
                let outer = set.outer.value(2 * k, x)?;
                let d = (e.value() - outer).abs();
                if d > OVERLAP_TOL * (1.0 + outer.abs()) {
                    return Err(Error::Construction(format!(
                        "e_{} = {} differs from E_{} = {} at x = {x} (|Δ| = {d:e})",
                        2 * k,
                        e.value(),
                        2 * k,
                        outer
                    )));
                }
            }
            coeffs.push(e.coeffs().to_vec());
        }
        set.tables.push(PiecewiseTaylor { x0: -COLLOCATION_HALF, spacing, coeffs });
    }
    Ok(())
}

/// Taylor series in ξ of e_{2k}(x + ξ) from the k-th condition along the
/// boundary curve through (x, g(x)).
fn solve_node(
    set: &CoeffSet,
    op: &crate::compat::CompatOperator,
    k: usize,
    x: f64,
    dk: usize,
    total: usize,
) -> Result<Series> {
    let partial = set.partial_sum(x, total, 2 * k - 1)?;
    let mut dg = set.domain.g_series(x, dk + 1);
    dg.set_coeff(0, 0, 0.0);
    let xi = Series::var(1, dk, 0, 0.0);
    let dg_curve = dg.truncated(dk);
    let slope = dg.diff(0);
    let order = 2 * k;
    let lead = factorial(order);
    let base: DerivJet<Series> = DerivJet::from_fn(order, |a, b| {
        let mut p = partial.clone();
        for _ in 0..a {
            p = p.diff(0);
        }
        for _ in 0..b {
            p = p.diff(1);
        }
        p.substitute(&xi, Some(&dg_curve))
    });
    // contribution of (y−g)^{2k} e: (2k)!·(−g')^a·e at order 2k
    let with = |e: &Series| {
        let mut jet = base.clone();
        for a in 0..=order {
            let b = order - a;
            let extra = (-1.0 * &slope).powi(a as u32) * e * lead;
            let v = &jet.at(a, b) + &extra;
            jet.set(a, b, v).expect("entry within depth");
        }
        jet
    };
    let zero = Series::zeros(1, dk);
    let one = Series::constant(1, dk, 1.0);
    let r0 = op.evaluate(&with(&zero))?;
    let r1 = op.evaluate(&with(&one))?;
    let r2 = op.evaluate(&with(&(2.0 * &one)))?;
    let slope_e = &r1 - &r0;
    let affine = &r2 - &(&r0 + &(2.0 * &slope_e));
    let scale = 1.0 + r0.value().abs() + slope_e.value().abs();
    let nonaffine = affine
        .coeffs()
        .iter()
        .zip(r0.coeffs().iter().zip(slope_e.coeffs()))
        .any(|(d, (a, b))| d.abs() > 1e-8 * (1.0 + a.abs() + b.abs()));
    if nonaffine || slope_e.value() == 0.0 {
        return Err(Error::RootSolve(format!(
            "k = {k} at x = {x}: residual not affine in e_{order} (R(0) = {:e}, R(1) = {:e}, R(2) = {:e})",
            r0.value(),
            r1.value(),
            r2.value()
        )));
    }
    // the secant slope carries the cancellation error of r1 − r0; one
    // correction step against the exact residual removes it
    let mut e = -1.0 * &(&r0 / &slope_e);
    let mut res = op.evaluate(&with(&e))?;
    for _ in 0..2 {
        e = &e - &(&res / &slope_e);
        res = op.evaluate(&with(&e))?;
    }
    if res.value().abs() > 1e-9 * scale {
        return Err(Error::RootSolve(format!("k = {k} at x = {x}: residual {:e} at the root", res.value())));
    }
    Ok(e)
}

/// Combined Gauss weights of the integral remainder: R = Σ_m W_m E_{2N+1+m} ỹ^m.
pub fn remainder_weights(n: usize) -> Vec<f64> {
    let p = 2 * n;
    let rule = crate::quadrature::gauss_legendre_on(n + REMAINDER_TERMS / 2 + 2, 0.0, 1.0);
    (0..=REMAINDER_TERMS)
        .map(|m| {
            let kernel: f64 = rule.iter().map(|&(s, w)| w * (1.0 - s).powi(p as i32) * s.powi(m as i32)).sum();
            kernel / factorial(p) * factorial(p + 1 + m) / factorial(m)
        })
        .collect()
}

/// Lower bound enforced on f: half the smaller of c_lower and min ψ on [−2δ, 2δ].
pub fn f_floor(bundle: &ProfileBundle, psi: &PsiSolution) -> f64 {
    0.5 * bundle.c_lower.min(psi.margins().0)
}

impl CoeffSet {
    /// Assembles f, h and the outer table, then collocates e₄ … e_{2N}.
    pub fn build(bundle: ProfileBundle, domain: DomainSpec, psi: &PsiSolution, blend: FBlend) -> Result<Self> {
        blend.validate(domain.delta)?;
        if (psi.delta - domain.delta).abs() > 1e-15 || psi.alpha != bundle.alpha {
            return Err(Error::InvalidParameter("ψ, domain and profile disagree on α or δ".into()));
        }
        let floor = f_floor(&bundle, psi);
        let lo = blend.left[0].min(-COLLOCATION_HALF);
        let hi = blend.right[1].max(COLLOCATION_HALF);
        let ext = psi.extended(lo, hi, 0.0);
        if ext.x_min() > blend.left[0] + ext.step || ext.x_max() < blend.right[1] - ext.step {
            return Err(Error::Construction(format!(
                "ψ is positive only on [{:.4}, {:.4}], short of the blend windows",
                ext.x_min(),
                ext.x_max()
            )));
        }
        let outer = OuterTable::build(&bundle, 2 * bundle.n + 1 + REMAINDER_TERMS);
        let mut set = CoeffSet {
            n: bundle.n,
            alpha: bundle.alpha,
            bundle,
            domain,
            psi: ext,
            blend,
            tables: Vec::new(),
            outer,
        };
        let steps = 2000;
        for i in 0..=steps {
            let x = -1.0 + 2.0 * i as f64 / steps as f64;
            let f = set.f_series(x, 0)?.value();
            if !(f >= floor) {
                return Err(Error::Construction(format!("f = {f:.6} below the floor {floor:.6} at x = {x:.4}")));
            }
        }
        build_higher_coeffs(&mut set)?;
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainder_weights_are_one() {
        // ∫₀¹ (1−s)^{2N} s^m ds is a beta integral that cancels the factorials
        for n in 1..=3 {
            for w in remainder_weights(n) {
                assert!((w - 1.0).abs() < 1e-12, "{w}");
            }
        }
    }

    #[test]
    fn blend_weight_switches_between_psi_and_outer() {
        let b = FBlend { left: [-0.45, -0.2], right: [0.2, 0.45] };
        assert!(b.validate(0.1).is_ok());
        let at = |x: f64| b.weight(x, 0).value();
        // weight of E₁: none on the ψ part, all of it past the blends
        assert_eq!(at(0.0), 0.0);
        assert_eq!(at(0.6), 1.0);
        assert_eq!(at(-0.6), 1.0);
        let mid = at(0.325);
        assert!(mid > 0.0 && mid < 1.0);
    }
}
