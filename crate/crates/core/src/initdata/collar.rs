//! The collar field: the expansion in the bottom strip and U elsewhere.

use crate::error::{Error, Result};
use crate::geometry::g_circle_series;
use crate::series::Series;

use super::coeffs::{remainder_weights, CoeffSet, REMAINDER_TERMS};

/// Offset below the boundary still accepted by the expansion, so that
/// difference stencils straddling the boundary can be evaluated.
const BELOW_BOUNDARY: f64 = 1e-2;

#[derive(Clone, Debug)]
pub struct CollarField {
    pub coeffs: CoeffSet,
    weights: Vec<f64>,
}

/// The three entries of `v D²v − (1−α) ∇v⊗∇v` and its determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollarQuantities {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub det: f64,
}

impl CollarQuantities {
    pub fn from_jet(s: &Series, alpha: f64) -> Self {
        let v = s.coeff(0, 0);
        let (vx, vy) = (s.coeff(1, 0), s.coeff(0, 1));
        let (vxx, vxy, vyy) = (2.0 * s.coeff(2, 0), s.coeff(1, 1), 2.0 * s.coeff(0, 2));
        let b = 1.0 - alpha;
        let xx = v * vxx - b * vx * vx;
        let yy = v * vyy - b * vy * vy;
        let xy = v * vxy - b * vx * vy;
        CollarQuantities { xx, yy, xy, det: xx * yy - xy * xy }
    }
}

impl CollarField {
    pub fn new(coeffs: CoeffSet) -> Self {
        let weights = remainder_weights(coeffs.n);
        CollarField { coeffs, weights }
    }

    pub fn alpha(&self) -> f64 {
        self.coeffs.alpha
    }

    /// Quadrature weights of the integral remainder, one per retained term.
    pub fn remainder_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Expansion about the graph of g, valid for |x| ≤ 1 near the bottom
    /// boundary. R uses the integral remainder of U about G.
    pub fn expansion_series(&self, x: f64, y: f64, depth: usize) -> Result<Series> {
        let c = &self.coeffs;
        let n2 = 2 * c.n;
        if !(x.abs() <= 1.0 + 1e-9) || y > 1.0 {
            return Err(Error::OutsideRegion { x, y });
        }
        let gs = c.domain.g_series(x, depth);
        if y - gs.value() < -BELOW_BOUNDARY {
            return Err(Error::OutsideRegion { x, y });
        }
        let yv = Series::var(2, depth, 1, y);
        let t = &yv - &gs.lift(0);
        let tg = &yv - &g_circle_series(x, depth).lift(0);
        let mut rem = Series::zeros(2, depth);
        for m in (0..=REMAINDER_TERMS).rev() {
            let e = c.outer.series(n2 + 1 + m, x, depth)?.lift(0);
            rem = &(&rem * &tg) + &(&e * self.weights[m]);
        }
        // the Horner loop below contributes t^{2N}
        let mut acc = &t * &rem;
        for l in (1..=n2).rev() {
            acc = &t * &(acc + c.e_series(l, x, depth)?.lift(0));
        }
        Ok(acc)
    }

    /// Uses the expansion on the strip |x| < 1/2 below y = 1 and U elsewhere,
    /// where the two coincide.
    pub fn series(&self, x: f64, y: f64, depth: usize) -> Result<Series> {
        if x.abs() < 0.5 && y < 1.0 {
            self.expansion_series(x, y, depth)
        } else {
            self.coeffs.bundle.u_series(x, y, depth)
        }
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.series(x, y, 0)?.value())
    }

    pub fn quantities(&self, x: f64, y: f64) -> Result<CollarQuantities> {
        Ok(CollarQuantities::from_jet(&self.series(x, y, 2)?, self.alpha()))
    }
}

/// Worst normalised values of the collar inequalities over a scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollarScan {
    /// Largest `(v v_xx − (1−α)v_x²)/(y−g)²`; must be negative.
    pub xx_ratio: f64,
    /// Largest `v v_yy − (1−α)v_y²`.
    pub yy_max: f64,
    /// Smallest `det/(y−g)²`; must be positive.
    pub det_ratio: f64,
    pub points: usize,
    /// (x, y − g) of the worst xx and det ratios.
    pub xx_at: [f64; 2],
    pub det_at: [f64; 2],
}

impl CollarScan {
    pub fn passes(&self, margin: f64) -> bool {
        self.xx_ratio <= -margin && self.yy_max < 0.0 && self.det_ratio >= margin
    }

    /// The fitted constant a of `v v_xx − (1−α)v_x² ≤ −a(y−g)²` and `det ≥ a(y−g)²`.
    pub fn fitted_a(&self) -> f64 {
        (-self.xx_ratio).min(self.det_ratio)
    }
}

/// Scans `{|x| ≤ 1, g < y < g + eps}` with x-step `dx` and `ny` offsets.
pub fn scan_collar(field: &CollarField, eps: f64, dx: f64, ny: usize) -> Result<CollarScan> {
    let nx = (2.0 / dx).round() as usize;
    let mut out = CollarScan { xx_ratio: f64::NEG_INFINITY, yy_max: f64::NEG_INFINITY, det_ratio: f64::INFINITY, points: 0, xx_at: [0.0; 2], det_at: [0.0; 2] };
    for i in 0..=nx {
        let x = -1.0 + i as f64 * dx;
        let g = field.coeffs.domain.g(x);
        for k in 1..=ny {
            let d = eps * k as f64 / ny as f64;
            let q = field.quantities(x, g + d)?;
            if q.xx / (d * d) > out.xx_ratio {
                out.xx_ratio = q.xx / (d * d);
                out.xx_at = [x, d];
            }
            out.yy_max = out.yy_max.max(q.yy);
            if q.det / (d * d) < out.det_ratio {
                out.det_ratio = q.det / (d * d);
                out.det_at = [x, d];
            }
            out.points += 1;
        }
    }
    Ok(out)
}
