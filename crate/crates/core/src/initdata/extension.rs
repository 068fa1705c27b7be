//! Concave extension of a collar field: truncate the concave transform at a
//! level, mollify, and blend back to the exact field near the boundary.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::quadrature::{gauss_legendre, gauss_legendre_on};
use crate::series::Series;

/// `w = v^α` for α > 0 and `w = log v` for α = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub alpha: f64,
}

impl Transform {
    pub fn new(alpha: f64) -> Self {
        Transform { alpha }
    }

    pub fn forward(&self, v: f64) -> f64 {
        if self.alpha == 0.0 {
            v.ln()
        } else {
            v.powf(self.alpha)
        }
    }

    pub fn inverse(&self, w: f64) -> f64 {
        if self.alpha == 0.0 {
            w.exp()
        } else {
            w.powf(1.0 / self.alpha)
        }
    }

    pub fn forward_series(&self, v: &Series) -> Series {
        if self.alpha == 0.0 {
            v.ln()
        } else {
            v.powf(self.alpha)
        }
    }

    pub fn inverse_series(&self, w: &Series) -> Series {
        if self.alpha == 0.0 {
            w.exp()
        } else {
            w.powf(1.0 / self.alpha)
        }
    }

    /// (w, w', w'') from (v, v', v'') along a line.
    pub fn forward_jet(&self, v: [f64; 3]) -> [f64; 3] {
        let s = Series::from_coeffs(vec![v[0], v[1], 0.5 * v[2]]);
        let w = self.forward_series(&s);
        [w.coeff(0, 0), w.coeff(1, 0), 2.0 * w.coeff(2, 0)]
    }

    pub fn inverse_jet(&self, w: [f64; 3]) -> [f64; 3] {
        let s = Series::from_coeffs(vec![w[0], w[1], 0.5 * w[2]]);
        let v = self.inverse_series(&s);
        [v.coeff(0, 0), v.coeff(1, 0), 2.0 * v.coeff(2, 0)]
    }
}

fn eta_raw(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - z * z)).exp()
    }
}

/// Unit-mass bump on [−1, 1].
pub fn eta1(z: f64) -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    let c = NORM.get_or_init(|| {
        let mut s = 0.0;
        for k in 0..64 {
            let a = -1.0 + 2.0 * k as f64 / 64.0;
            for (x, w) in gauss_legendre_on(16, a, a + 2.0 / 64.0) {
                s += w * eta_raw(x);
            }
        }
        s
    });
    eta_raw(z) / c
}

/// Radial profile of the unit-mass bump on the unit disk, with its first two
/// radial derivatives.
pub fn eta2(rho: f64) -> [f64; 3] {
    static NORM: OnceLock<f64> = OnceLock::new();
    let c = *NORM.get_or_init(|| {
        let mut s = 0.0;
        for k in 0..64 {
            let a = k as f64 / 64.0;
            for (x, w) in gauss_legendre_on(16, a, a + 1.0 / 64.0) {
                s += w * 2.0 * std::f64::consts::PI * x * eta_raw(x);
            }
        }
        s
    });
    if rho >= 1.0 {
        return [0.0; 3];
    }
    let e = eta_raw(rho) / c;
    let u = 1.0 - rho * rho;
    // d/dρ exp(−1/u) = −2ρ/u² · exp(−1/u)
    let d1 = -2.0 * rho / (u * u) * e;
    let d2 = e * (4.0 * rho * rho / u.powi(4) - 2.0 / (u * u) - 8.0 * rho * rho / u.powi(3));
    [e, d1, d2]
}

/// Cached Gauss–Legendre rule with `n ≤ 64` nodes on [−1, 1].
pub(crate) fn rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: [OnceLock<(Vec<f64>, Vec<f64>)>; 65] = [const { OnceLock::new() }; 65];
    let n = n.clamp(1, 64);
    RULES[n].get_or_init(|| gauss_legendre(n))
}

/// Radial variant: all levels expressed as radii since the transform is
/// decreasing in r on the collar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialExtension {
    pub transform: Transform,
    /// Truncation radius: w̃ = w for r ≥ r_cut, a = w(r_cut) inside.
    pub r_cut: f64,
    /// φ = 0 for r ≤ r_blend_lo, φ = 1 for r ≥ r_blend_hi.
    pub r_blend_lo: f64,
    pub r_blend_hi: f64,
    pub level: f64,
    pub eps: f64,
}

impl RadialExtension {
    /// Mollified truncated transform and its first two derivatives.
    pub fn mollified(&self, r: f64, w: &dyn Fn(f64) -> [f64; 3]) -> [f64; 3] {
        let (eps, rc) = (self.eps, self.r_cut);
        if r + eps <= rc {
            return [self.level, 0.0, 0.0];
        }
        let lo = (r - eps).max(rc);
        let hi = r + eps;
        let (xs, ws) = rule(48);
        let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let (mut f0, mut f1, mut f2) = (0.0, 0.0, 0.0);
        let mut mass = 0.0;
        for (&x, &wt) in xs.iter().zip(ws.iter()) {
            let s = m + h * x;
            let k = eta1((r - s) / eps) / eps * wt * h;
            let ws = w(s);
            f0 += k * ws[0];
            f1 += k * ws[1];
            f2 += k * ws[2];
            mass += k;
        }
        if r - eps < rc {
            f0 += (1.0 - mass) * self.level;
            f2 += w(rc)[1] * eta1((r - rc) / eps) / eps;
        }
        [f0, f1, f2]
    }

    pub fn blend_weight(&self, r: f64) -> [f64; 3] {
        let len = self.r_blend_hi - self.r_blend_lo;
        let s = Series::var(1, 2, 0, (r - self.r_blend_lo) / len);
        let p = crate::geometry::smooth_step_series(&s);
        [p.coeff(0, 0), p.coeff(1, 0) / len, 2.0 * p.coeff(2, 0) / (len * len)]
    }

    /// Extended transform F and derivatives at radius r.
    pub fn transform_jet(&self, r: f64, w: &dyn Fn(f64) -> [f64; 3]) -> [f64; 3] {
        if r >= self.r_blend_hi {
            return w(r);
        }
        let fe = self.mollified(r, w);
        if r <= self.r_blend_lo {
            return fe;
        }
        let p = self.blend_weight(r);
        let wr = w(r);
        let d = [wr[0] - fe[0], wr[1] - fe[1], wr[2] - fe[2]];
        [
            fe[0] + p[0] * d[0],
            fe[1] + p[1] * d[0] + p[0] * d[1],
            fe[2] + p[2] * d[0] + 2.0 * p[1] * d[1] + p[0] * d[2],
        ]
    }

    /// Field jet (v, v', v'') after the inverse transform.
    pub fn field_jet(&self, r: f64, w: &dyn Fn(f64) -> [f64; 3]) -> [f64; 3] {
        self.transform.inverse_jet(self.transform_jet(r, w))
    }
}

/// Levels for the radial variant from the width of the concave collar.
pub fn radial_levels(collar_width: f64) -> (f64, f64, f64) {
    let r0 = 2.0 - collar_width;
    (r0 + 0.25 * collar_width, r0 + 0.5 * collar_width, r0 + 0.625 * collar_width)
}
