//! Interface extraction: column heights of the melted region and
//! marching-squares contours.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Grid, Snapshot};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceTrace {
    pub t: f64,
    pub h: f64,
    /// `(x, w(x))` per grid column in the window.
    pub samples: Vec<[f64; 2]>,
    /// Segments of the liquid-fraction contour at 1/2.
    pub polyline: Vec<[[f64; 2]; 2]>,
    pub reliable: bool,
    pub issues: Vec<String>,
}

impl InterfaceTrace {
    /// w at x by linear interpolation between column samples.
    pub fn w_at(&self, x: f64) -> Result<f64> {
        let s = &self.samples;
        if s.len() < 2 || x < s[0][0] || x > s[s.len() - 1][0] {
            return Err(Error::Diagnostic(format!("x = {x} outside the traced window")));
        }
        let k = s.partition_point(|p| p[0] < x).clamp(1, s.len() - 1);
        let (a, b) = (s[k - 1], s[k]);
        Ok(a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0]))
    }

    pub fn samples_in(&self, window: [f64; 2]) -> Vec<[f64; 2]> {
        self.samples.iter().copied().filter(|p| p[0] >= window[0] && p[0] <= window[1]).collect()
    }
}

/// Lower interface `y = w(x)` over columns whose centres lie in `window`,
/// searching below `y_max`. In each column w is the bottom edge of the
/// first fully melted cell minus the melted height of the cells beneath it.
pub fn extract_interface(snap: &Snapshot, window: [f64; 2], y_max: f64) -> InterfaceTrace {
    let g = snap.grid;
    let mut samples = Vec::new();
    let mut issues = Vec::new();
    let jmax = (((y_max - g.y0) / g.h).floor() as usize).min(g.n);
    for i in 0..g.n {
        let x = g.center(i, 0)[0];
        if x < window[0] || x > window[1] {
            continue;
        }
        let col = |j: usize| snap.h_field[g.index(i, j)];
        let Some(jf) = (0..jmax).find(|&j| col(j) >= 1.0) else {
            issues.push(format!("column x = {x:.5} has no melted cell below y = {y_max}"));
            continue;
        };
        if (jf..jmax).any(|j| col(j) < 1.0) {
            issues.push(format!("column x = {x:.5} crosses H = 1 more than once"));
        }
        let below: f64 = (0..jf).map(|j| col(j).clamp(0.0, 1.0)).sum();
        let edge = g.y0 + jf as f64 * g.h;
        samples.push([x, edge - g.h * below]);
    }
    let frac: Vec<f64> = snap.h_field.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let polyline = contour_segments(&frac, g, 0.5);
    InterfaceTrace { t: snap.t, h: g.h, samples, polyline, reliable: issues.is_empty(), issues }
}

/// Marching squares on the cell-centre lattice; saddles are resolved by
/// the mean of the four corners.
pub fn contour_segments(values: &[f64], g: Grid, level: f64) -> Vec<[[f64; 2]; 2]> {
    let n = g.n;
    let mut out = Vec::new();
    for j in 0..n.saturating_sub(1) {
        for i in 0..n.saturating_sub(1) {
            let c = [
                (g.center(i, j), values[g.index(i, j)]),
                (g.center(i + 1, j), values[g.index(i + 1, j)]),
                (g.center(i + 1, j + 1), values[g.index(i + 1, j + 1)]),
                (g.center(i, j + 1), values[g.index(i, j + 1)]),
            ];
            let above: Vec<bool> = c.iter().map(|e| e.1 >= level).collect();
            let mut pts = Vec::with_capacity(4);
            for k in 0..4 {
                let (a, b) = (c[k], c[(k + 1) % 4]);
                if above[k] != above[(k + 1) % 4] {
                    let s = (level - a.1) / (b.1 - a.1);
                    pts.push([a.0[0] + s * (b.0[0] - a.0[0]), a.0[1] + s * (b.0[1] - a.0[1])]);
                }
            }
            match pts.len() {
                2 => out.push([pts[0], pts[1]]),
                4 => {
                    let mean = c.iter().map(|e| e.1).sum::<f64>() / 4.0;
                    // edges run bottom, right, top, left from corner 0
                    if (mean >= level) == above[0] {
                        out.push([pts[0], pts[1]]);
                        out.push([pts[2], pts[3]]);
                    } else {
                        out.push([pts[3], pts[0]]);
                        out.push([pts[1], pts[2]]);
                    }
                }
                _ => {}
            }
        }
    }
    out
}
