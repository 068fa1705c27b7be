//! The radial function `U(x, y) = q(r)` on the disk of radius 2 centred at
//! (0, 2): boundary Taylor data at r = 2 satisfying the first N
//! compatibility conditions, and a concave interior extension.

use serde::{Deserialize, Serialize};

use crate::compat::{derive_compat_operator, CompatOperator};
use crate::error::{Error, Result};
use crate::geometry::DISK_CENTER;
use crate::initdata::extension::{radial_levels, RadialExtension, Transform};
use crate::series::{factorial, Series};

const COLLAR_START: f64 = 0.5;
const COLLAR_MIN: f64 = 1e-3;
const COLLAR_GRID: f64 = 1e-3;
const COLLAR_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileBundle {
    pub alpha: f64,
    pub n: usize,
    /// q(2), q'(2), …, q^(2N+1)(2).
    pub boundary_coeffs: Vec<f64>,
    /// Seed curvature q̂''(2) before scaling and the scaling factor λ.
    pub seed_curvature: f64,
    pub scaling: f64,
    /// Radial width of the collar where q^α (log q for α = 0) is strictly
    /// decreasing and strictly concave.
    pub collar_width: f64,
    pub extension: RadialExtension,
    pub c_lower: f64,
}

/// Radial concavity test for given (q, q', q''): (q^α)' < 0 and (q^α)'' < 0,
/// log q for α = 0.
pub fn radial_concavity_holds(q: f64, dq: f64, d2q: f64, alpha: f64) -> bool {
    q > 0.0 && dq < 0.0 && q * d2q - (1.0 - alpha) * dq * dq < 0.0
}

fn u_boundary_jet(coeffs: &[f64], depth: usize) -> crate::jet::DerivJet {
    // boundary point (0, 0): r = 2 exactly
    let x = Series::var(2, depth, 0, 0.0);
    let y = Series::var(2, depth, 1, 0.0);
    let r = (&x * &x + (&y - 2.0).square()).sqrt();
    let taylor: Vec<f64> = coeffs.iter().enumerate().map(|(k, c)| c / factorial(k)).collect();
    r.compose(&taylor, true).to_jet()
}

fn solve_even_coeff(coeffs: &mut [f64], k: usize, op: &CompatOperator) -> Result<()> {
    let idx = 2 * k;
    let mut residual = |c: f64| -> Result<f64> {
        coeffs[idx] = c;
        op.evaluate(&u_boundary_jet(coeffs, idx))
    };
    let r0 = residual(0.0)?;
    let r1 = residual(1.0)?;
    let r2 = residual(2.0)?;
    let slope = r1 - r0;
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::RootSolve(format!(
            "k = {k}: residual does not depend on q^({idx})(2) (R(0) = {r0:e}, R(1) = {r1:e})"
        )));
    }
    let affine_err = (r2 - (r0 + 2.0 * slope)).abs();
    if affine_err > 1e-9 * (1.0 + r0.abs() + slope.abs()) {
        return Err(Error::RootSolve(format!(
            "k = {k}: residual not affine in q^({idx})(2): R(0) = {r0:e}, R(1) = {r1:e}, R(2) = {r2:e}"
        )));
    }
    let root = -r0 / slope;
    let rr = residual(root)?;
    if rr.abs() > 1e-10 * (1.0 + r0.abs()) {
        return Err(Error::RootSolve(format!("k = {k}: residual {rr:e} at the secant root {root}")));
    }
    Ok(())
}

pub fn build_profile(alpha: f64, n: usize, q1: f64) -> Result<ProfileBundle> {
    build_profile_seeded(alpha, n, q1, q1 * q1 - 0.5 * q1)
}

/// Builds the profile from the seed `q̂(2) = 0, q̂'(2) = q1, q̂''(2) = seed`,
/// scaled by λ = (q̂'' + q̂'/2)/q̂'² so that `q'' + q'/2 = q'²` at r = 2.
pub fn build_profile_seeded(alpha: f64, n: usize, q1: f64, seed: f64) -> Result<ProfileBundle> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must be in [0, 1/2), got {alpha}")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("N must be ≥ 1".into()));
    }
    if !(q1 < 0.0) {
        return Err(Error::InvalidParameter(format!("q1 must be negative, got {q1}")));
    }
    let scaling = (seed + 0.5 * q1) / (q1 * q1);
    if !(scaling > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "seed curvature {seed} gives non-positive scaling {scaling}"
        )));
    }
    let mut coeffs = vec![0.0; 2 * n + 2];
    coeffs[1] = scaling * q1;
    coeffs[2] = scaling * seed;
    for k in 2..=n {
        let op = derive_compat_operator(k)?;
        solve_even_coeff(&mut coeffs, k, &op)?;
    }
    let poly = Poly { taylor: coeffs.iter().enumerate().map(|(k, c)| c / factorial(k)).collect() };

    let mut cw = COLLAR_START;
    loop {
        let steps = (cw / COLLAR_GRID).round() as usize;
        let ok = (1..=steps).all(|k| {
            let r = 2.0 - k as f64 * COLLAR_GRID;
            let [q, dq, d2q] = poly.jet(r);
            q > COLLAR_MARGIN
                && dq < -COLLAR_MARGIN
                && q * d2q - (1.0 - alpha) * dq * dq < -COLLAR_MARGIN
        });
        if ok {
            break;
        }
        cw *= 0.5;
        if cw < COLLAR_MIN {
            return Err(Error::Construction(format!("radial collar shrinks below {COLLAR_MIN}")));
        }
    }

    let extension = build_radial_extension(&poly, alpha, cw)?;
    let c_lower = (0..=200)
        .map(|k| {
            let x = -1.0 + k as f64 / 100.0;
            -coeffs[1] * (4.0 - x * x).sqrt() / 2.0
        })
        .fold(f64::INFINITY, f64::min);
    Ok(ProfileBundle {
        alpha,
        n,
        boundary_coeffs: coeffs,
        seed_curvature: seed,
        scaling,
        collar_width: cw,
        extension,
        c_lower,
    })
}

struct Poly {
    taylor: Vec<f64>,
}

impl Poly {
    fn jet(&self, r: f64) -> [f64; 3] {
        let s = Series::from_coeffs(self.taylor.clone());
        let d = r - 2.0;
        [s.eval_derivative(d, 0), s.eval_derivative(d, 1), s.eval_derivative(d, 2)]
    }
}

fn build_radial_extension(poly: &Poly, alpha: f64, cw: f64) -> Result<RadialExtension> {
    let tr = Transform::new(alpha);
    let w = |r: f64| tr.forward_jet(poly.jet(r));
    let (r_cut, lo, hi) = radial_levels(cw);
    let level = w(r_cut)[0];
    let eps_max = (2.0 - hi).min(r_cut);
    let mut eps = 0.5;
    while eps >= eps_max {
        eps *= 0.5;
    }
    let mut last = String::new();
    while eps > 1e-6 {
        let ext = RadialExtension { transform: tr, r_cut, r_blend_lo: lo, r_blend_hi: hi, level, eps };
        let n = 2000;
        let a = r_cut - eps;
        let mut ok = true;
        for k in 0..=n {
            let r = a + (hi - a) * k as f64 / n as f64;
            let f = ext.transform_jet(r, &w);
            let inner = r > r_cut - eps + 1e-9 * eps;
            if f[1] > 0.0 || f[2] > 0.0 || (inner && r > lo && !(f[2] < 0.0)) {
                last = format!("eps = {eps}: F' = {:e}, F'' = {:e} at r = {r}", f[1], f[2]);
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(ext);
        }
        eps *= 0.5;
    }
    Err(Error::Construction(format!("radial extension not concave ({last})")))
}

impl ProfileBundle {
    pub fn transform(&self) -> Transform {
        self.extension.transform
    }

    pub fn taylor_coeffs(&self) -> Vec<f64> {
        self.boundary_coeffs.iter().enumerate().map(|(k, c)| c / factorial(k)).collect()
    }

    fn poly(&self) -> Poly {
        Poly { taylor: self.taylor_coeffs() }
    }

    /// Radius above which q is the boundary Taylor polynomial.
    pub fn retained_radius(&self) -> f64 {
        self.extension.r_blend_hi
    }

    /// Transform jet (w, w', w'') of the polynomial part.
    pub fn w_poly(&self, r: f64) -> [f64; 3] {
        self.transform().forward_jet(self.poly().jet(r))
    }

    /// r-derivative of q of the given order.
    pub fn eval_q(&self, r: f64, order: usize) -> Result<f64> {
        if !(0.0..=2.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("r = {r} outside [0, 2]")));
        }
        Ok(self.q_series(r, order)?.derivative(order, 0))
    }

    /// Taylor coefficients of q about r.
    pub fn q_series(&self, r: f64, depth: usize) -> Result<Series> {
        if r >= self.retained_radius() {
            // exact polynomial: derivatives past 2N+1 vanish
            let p = Series::from_coeffs(self.taylor_coeffs());
            let c: Vec<f64> = (0..=depth)
                .map(|k| p.eval_derivative(r - 2.0, k) / factorial(k))
                .collect();
            return Ok(Series::from_coeffs(c));
        }
        if depth > 2 {
            return Err(Error::OrderUnavailable { order: depth, region: "the radial extension" });
        }
        let w = |s: f64| self.w_poly(s);
        let v = self.extension.field_jet(r, &w);
        let mut c = vec![v[0], v[1], 0.5 * v[2]];
        c.truncate(depth + 1);
        Ok(Series::from_coeffs(c))
    }

    /// Bivariate Taylor series of U about (x, y).
    pub fn u_series(&self, x: f64, y: f64, depth: usize) -> Result<Series> {
        let (dx, dy) = (x - DISK_CENTER[0], y - DISK_CENTER[1]);
        let r0 = (dx * dx + dy * dy).sqrt();
        if r0 > 2.0 + 1e-12 {
            return Err(Error::OutsideRegion { x, y });
        }
        if r0 + self.extension.eps < self.extension.r_cut {
            if depth > 2 {
                return Err(Error::OrderUnavailable { order: depth, region: "the radial extension" });
            }
            let v = self.transform().inverse(self.extension.level);
            return Ok(Series::constant(2, depth, v));
        }
        let xs = Series::var(2, depth, 0, dx);
        let ys = Series::var(2, depth, 1, dy);
        let r = (&xs * &xs + &ys * &ys).sqrt();
        let q = self.q_series(r0, depth)?;
        Ok(r.compose(q.coeffs(), r0 >= self.retained_radius()))
    }

    pub fn u_value(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - DISK_CENTER[0], y - DISK_CENTER[1]);
        let r = (dx * dx + dy * dy).sqrt();
        if r >= 2.0 {
            return 0.0;
        }
        if r >= self.retained_radius() {
            return Series::from_coeffs(self.taylor_coeffs()).eval_derivative(r - 2.0, 0);
        }
        if r + self.extension.eps < self.extension.r_cut {
            return self.transform().inverse(self.extension.level);
        }
        let w = |s: f64| self.w_poly(s);
        self.extension.field_jet(r, &w)[0]
    }

    pub fn check_radial_concavity(&self, r: f64, alpha: f64) -> Result<bool> {
        if r <= 0.0 {
            return Err(Error::InvalidParameter("radial concavity test excludes r = 0".into()));
        }
        let s = self.q_series(r, 2)?;
        Ok(radial_concavity_holds(s.coeff(0, 0), s.coeff(1, 0), 2.0 * s.coeff(2, 0), alpha))
    }

    /// First-compatibility residual of U at r = 2.
    pub fn first_compat_residual(&self) -> f64 {
        let c = &self.boundary_coeffs;
        c[2] + 0.5 * c[1] - c[1] * c[1]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_compatibility_after_scaling() {
        let b = build_profile(0.25, 1, -1.0).unwrap();
        assert_eq!(b.boundary_coeffs[0], 0.0);
        assert_eq!(b.boundary_coeffs[1], -1.0);
        assert_eq!(b.boundary_coeffs[2], 1.5);
        assert_eq!(b.first_compat_residual(), 0.0);
    }

    #[test]
    fn seeded_scaling() {
        let b = build_profile_seeded(0.25, 2, -1.0, 2.5).unwrap();
        assert!((b.scaling - 2.0).abs() < 1e-15);
        assert!(b.first_compat_residual().abs() < 1e-14);
    }

    #[test]
    fn q_values() {
        let b = build_profile(0.25, 2, -1.0).unwrap();
        assert_eq!(b.eval_q(2.0, 0).unwrap(), 0.0);
        assert_eq!(b.eval_q(2.0, 1).unwrap(), -1.0);
        assert!(b.eval_q(2.0 - b.collar_width / 2.0, 0).unwrap() > 0.0);
        assert!(b.eval_q(2.0 - b.collar_width, 3).is_err());
        assert!(b.check_radial_concavity(2.0 - b.collar_width / 4.0, 0.25).unwrap());
    }

    #[test]
    fn parabola_concavity() {
        for r in [0.1, 0.5, 1.5] {
            assert!(radial_concavity_holds(4.0 - r * r, -2.0 * r, -2.0, 1.0));
        }
    }
}
