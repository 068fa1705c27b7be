//! The α-concavity matrix `v D²v − (1−α) ∇v⊗∇v` and region scans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::DerivJet;

pub const TOL_ANALYTIC: f64 = 1e-10;
pub const TOL_FINITE_DIFFERENCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
    pub alpha: f64,
    pub location: [f64; 2],
}

pub fn concavity_matrix(jet: &DerivJet, alpha: f64, location: [f64; 2]) -> Result<ConcavityMatrix> {
    if jet.depth() < 2 {
        return Err(Error::Depth { requested: 2, available: jet.depth() });
    }
    let v = jet.value();
    if !(v > 0.0) {
        return Err(Error::InvalidParameter(format!("concavity matrix needs v > 0, got {v:e} at {location:?}")));
    }
    let [vx, vy] = jet.gradient();
    let [vxx, vxy, vyy] = jet.hessian();
    let b = 1.0 - alpha;
    Ok(ConcavityMatrix {
        m11: v * vxx - b * vx * vx,
        m12: v * vxy - b * vx * vy,
        m22: v * vyy - b * vy * vy,
        alpha,
        location,
    })
}

impl ConcavityMatrix {
    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    /// Eigenvalues, smaller first.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * self.trace();
        let r = (0.25 * (self.m11 - self.m22).powi(2) + self.m12 * self.m12).sqrt();
        // the eigenvalue of larger modulus first; the other from the determinant
        let big = if m >= 0.0 { m + r } else { m - r };
        let small = if big != 0.0 { self.det() / big } else { 0.0 };
        if big >= small {
            [small, big]
        } else {
            [big, small]
        }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[1]
    }

    pub fn is_nsd(&self, tol: f64) -> bool {
        let t = self.trace();
        t <= tol && self.det() >= -tol * (1.0 + t.abs()) && self.m11 <= tol && self.m22 <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub worst_eigenvalue: f64,
    pub worst_location: [f64; 2],
    pub n_points: usize,
    pub alpha: f64,
    pub tolerance: f64,
    pub violated: bool,
    pub sampler: String,
    /// Eigenvalues were divided by v² before comparison.
    #[serde(default)]
    pub normalized: bool,
}

impl ConcavityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Worst eigenvalue of the concavity matrix over `points`; ties go to the
/// lexicographically smaller location.
pub fn scan<F>(jet_at: F, points: &[[f64; 2]], alpha: f64, tol: f64, sampler: &str) -> Result<ConcavityReport>
where
    F: Fn([f64; 2]) -> Result<DerivJet>,
{
    scan_with(jet_at, points, alpha, tol, sampler, false)
}

/// As [`scan`]; with `normalized` the eigenvalues are divided by v², which
/// makes the test independent of the amplitude of v.
pub fn scan_with<F>(
    jet_at: F,
    points: &[[f64; 2]],
    alpha: f64,
    tol: f64,
    sampler: &str,
    normalized: bool,
) -> Result<ConcavityReport>
where
    F: Fn([f64; 2]) -> Result<DerivJet>,
{
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty concavity scan".into()));
    }
    let mut worst = (f64::NEG_INFINITY, [0.0; 2]);
    for &p in points {
        let jet = jet_at(p)?;
        let m = concavity_matrix(&jet, alpha, p)?;
        let v = jet.at(0, 0);
        let e = if normalized { m.max_eigenvalue() / (v * v) } else { m.max_eigenvalue() };
        let better = e > worst.0 || (e == worst.0 && (p[0], p[1]) < (worst.1[0], worst.1[1]));
        if better {
            worst = (e, p);
        }
    }
    Ok(ConcavityReport {
        worst_eigenvalue: worst.0,
        worst_location: worst.1,
        n_points: points.len(),
        alpha,
        tolerance: tol,
        violated: worst.0 > tol,
        sampler: sampler.to_string(),
        normalized,
    })
}

/// Depth-2 jet from point values: central differences at steps h and h/2
/// combined by Richardson extrapolation.
pub fn fd_jet<F>(value: F, p: [f64; 2], h: f64) -> Result<DerivJet>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    let at = |dx: f64, dy: f64| value([p[0] + dx, p[1] + dy]);
    let v0 = at(0.0, 0.0)?;
    let diffs = |h: f64| -> Result<[f64; 5]> {
        let (xp, xm, yp, ym) = (at(h, 0.0)?, at(-h, 0.0)?, at(0.0, h)?, at(0.0, -h)?);
        let (pp, pm, mp, mm) = (at(h, h)?, at(h, -h)?, at(-h, h)?, at(-h, -h)?);
        Ok([
            (xp - xm) / (2.0 * h),
            (yp - ym) / (2.0 * h),
            (xp - 2.0 * v0 + xm) / (h * h),
            (pp - pm - mp + mm) / (4.0 * h * h),
            (yp - 2.0 * v0 + ym) / (h * h),
        ])
    };
    let a = diffs(h)?;
    let b = diffs(0.5 * h)?;
    let r: Vec<f64> = a.iter().zip(&b).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    Ok(DerivJet::from_entries(
        2,
        &[((0, 0), v0), ((1, 0), r[0]), ((0, 1), r[1]), ((2, 0), r[2]), ((1, 1), r[3]), ((0, 2), r[4])],
    ))
}

/// Points of a uniform grid of step `h` inside a region, at least `offset`
/// away from its boundary.
pub fn grid_points(
    bbox: [f64; 4],
    h: f64,
    contains: impl Fn([f64; 2]) -> bool,
    distance: impl Fn([f64; 2]) -> f64,
    offset: f64,
) -> Vec<[f64; 2]> {
    let [x0, x1, y0, y1] = bbox;
    let nx = ((x1 - x0) / h).floor() as usize;
    let ny = ((y1 - y0) / h).floor() as usize;
    let mut out = Vec::new();
    for j in 0..=ny {
        let y = y0 + j as f64 * h;
        for i in 0..=nx {
            let p = [x0 + i as f64 * h, y];
            if contains(p) && distance(p) >= offset {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(v: f64, g: [f64; 2], h: [f64; 3]) -> DerivJet {
        DerivJet::from_entries(
            2,
            &[((0, 0), v), ((1, 0), g[0]), ((0, 1), g[1]), ((2, 0), h[0]), ((1, 1), h[1]), ((0, 2), h[2])],
        )
    }

    #[test]
    fn minus_identity() {
        let m = concavity_matrix(&jet(1.0, [0.0; 2], [-1.0, 0.0, -1.0]), 0.25, [0.0; 2]).unwrap();
        assert_eq!((m.m11, m.m12, m.m22), (-1.0, 0.0, -1.0));
        assert!(m.is_nsd(0.0));
    }

    #[test]
    fn convex_direction_violates() {
        let m = concavity_matrix(&jet(1.0, [0.0; 2], [2.0, 0.0, 0.0]), 0.25, [0.0; 2]).unwrap();
        assert_eq!(m.m11, 2.0);
        assert!(!m.is_nsd(1e-10));
    }

    #[test]
    fn nsd_cases() {
        let mk = |a, b, c| ConcavityMatrix { m11: a, m12: b, m22: c, alpha: 0.0, location: [0.0; 2] };
        assert!(mk(0.0, 0.0, 0.0).is_nsd(0.0));
        assert!(mk(-1.0, 0.0, -1.0).is_nsd(0.0));
        assert!(!mk(-1.0, 2.0, -1.0).is_nsd(0.0));
    }

    #[test]
    fn nonpositive_value_rejected() {
        assert!(concavity_matrix(&jet(0.0, [1.0, 0.0], [0.0; 3]), 0.25, [0.0; 2]).is_err());
    }

    #[test]
    fn paraboloid_scan() {
        // q = 4 − r² about (0, 2), α = 1: M = −2q·I − 0 ≤ 0
        let f = |p: [f64; 2]| {
            let (x, y) = (p[0], p[1] - 2.0);
            Ok(jet(4.0 - x * x - y * y, [-2.0 * x, -2.0 * y], [-2.0, 0.0, -2.0]))
        };
        let pts = grid_points(
            [-1.9, 1.9, 0.1, 3.9],
            0.05,
            |p| p[0].hypot(p[1] - 2.0) < 1.9,
            |_| 1.0,
            0.0,
        );
        let r = scan(f, &pts, 1.0, TOL_ANALYTIC, "grid 0.05").unwrap();
        assert!(!r.violated);
        assert!(r.worst_eigenvalue < 0.0);
    }

    #[test]
    fn fd_jet_matches_polynomial() {
        let f = |p: [f64; 2]| Ok(1.0 + p[0] - 2.0 * p[1] + 0.5 * p[0] * p[0] + 3.0 * p[0] * p[1] - p[1] * p[1]);
        let j = fd_jet(f, [0.3, -0.2], 1e-3).unwrap();
        assert!((j.at(1, 0) - 0.7).abs() < 1e-9);
        assert!((j.at(0, 1) + 0.7).abs() < 1e-9);
        assert!((j.at(2, 0) - 1.0).abs() < 1e-6);
        assert!((j.at(1, 1) - 3.0).abs() < 1e-6);
        assert!((j.at(0, 2) + 2.0).abs() < 1e-6);
    }
}
