//! Convexity breaking of the free boundary and loss of α-concavity of the
//! temperature, read off solver snapshots.

use serde::{Deserialize, Serialize};

use crate::concavity::ConcavityMatrix;
use crate::error::{Error, Result};
use crate::geometry::FLAT_LEVEL;
use crate::psi::PsiSolution;
use crate::solver::interface::{contour_segments, InterfaceTrace};
use crate::solver::Snapshot;

pub const MIN_FIT_SAMPLES: usize = 12;
pub const DETECTION_RANGE: [f64; 2] = [0.05, 0.3];
/// Times up to this bound enter the magnitude comparison.
pub const MAGNITUDE_TIME: f64 = 0.1;
pub const MAGNITUDE_TOL: f64 = 0.5;
pub const WITNESS_FACTOR: f64 = 3.0;

/// Least-squares `w ≈ c0 + c1 x + c2 x²`.
pub fn fit_quadratic(samples: &[[f64; 2]]) -> Result<[f64; 3]> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::Diagnostic(format!(
            "quadratic fit needs {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let mut a = [[0.0; 4]; 3];
    for p in samples {
        let b = [1.0, p[0], p[0] * p[0]];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += b[r] * b[c];
            }
            a[r][3] += b[r] * p[1];
        }
    }
    let scale = (0..3).map(|k| a[k][k]).fold(0.0, f64::max);
    for k in 0..3 {
        let piv = (k..3).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).expect("pivot row");
        a.swap(k, piv);
        if !(a[k][k].abs() > 1e-12 * scale) {
            return Err(Error::Diagnostic("degenerate abscissae in quadratic fit".into()));
        }
        for r in 0..3 {
            if r != k {
                let f = a[r][k] / a[k][k];
                for c in k..4 {
                    a[r][c] -= f * a[k][c];
                }
            }
        }
    }
    Ok([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

pub fn fit_interface_quadratic(trace: &InterfaceTrace, window: [f64; 2]) -> Result<[f64; 3]> {
    if !trace.reliable {
        return Err(Error::UnreliableTrace(trace.issues.join("; ")));
    }
    fit_quadratic(&trace.samples_in(window))
}

/// `max |(w(x,t) − 1/20)/t + ψ(x)|` over the trace samples in `window`.
pub fn short_time_deviation(trace: &InterfaceTrace, psi: &PsiSolution, window: [f64; 2]) -> Result<f64> {
    if !trace.reliable {
        return Err(Error::UnreliableTrace(trace.issues.join("; ")));
    }
    if !(trace.t > 0.0) {
        return Err(Error::Diagnostic("short-time check needs t > 0".into()));
    }
    let pts = trace.samples_in(window);
    if pts.is_empty() {
        return Err(Error::Diagnostic("no trace samples in the window".into()));
    }
    let mut worst: f64 = 0.0;
    for p in pts {
        let (ps, _) = psi.eval(p[0])?;
        worst = worst.max(((p[1] - FLAT_LEVEL) / trace.t + ps).abs());
    }
    Ok(worst)
}

/// `3·(h/4)/δ²`: a quadratic coefficient below this is distinguishable from
/// interface localisation error.
pub fn noise_floor(h: f64, delta: f64) -> f64 {
    3.0 * (h / 4.0) / (delta * delta)
}

pub fn second_difference(trace: &InterfaceTrace, delta: f64) -> Result<f64> {
    Ok(trace.w_at(delta)? + trace.w_at(-delta)? - 2.0 * trace.w_at(0.0)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSeries {
    pub h: f64,
    pub times: Vec<f64>,
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub second_diffs: Vec<f64>,
    pub noise_floor: f64,
    /// Times whose traces were unreliable and left out.
    pub excluded: Vec<f64>,
    pub sign_ok: bool,
    /// Worst relative mismatch of the second difference against `−tψ''(0)δ²` for t ≤ 0.1.
    pub magnitude_mismatch: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaWitness {
    pub point: [f64; 2],
    pub eigenvalue: f64,
    pub noise: f64,
    pub eps_level: f64,
    pub contour_c2: f64,
    pub t: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakReport {
    pub alpha: f64,
    pub delta: f64,
    pub t_range: [f64; 2],
    pub grids: Vec<GridSeries>,
    pub grids_checked: Vec<f64>,
    pub break_detected: bool,
    pub magnitude_ok: bool,
    /// Witness per grid, coarse to fine.
    pub witnesses: Vec<Option<AlphaWitness>>,
    pub alpha_witness: Option<AlphaWitness>,
    pub witness_shift: Option<f64>,
    pub witness_stable: bool,
    pub notes: Vec<String>,
}

impl BreakReport {
    pub fn confirmed(&self) -> bool {
        self.break_detected && self.alpha_witness.is_some() && self.witness_stable
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `h,t,c0,c1,c2,secondDiff` rows.
    pub fn series_csv(&self) -> String {
        let mut s = String::from("h,t,c0,c1,c2,secondDiff\n");
        for g in &self.grids {
            for k in 0..g.times.len() {
                s.push_str(&format!(
                    "{:.9e},{:.6},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                    g.h, g.times[k], g.c0[k], g.c1[k], g.c2[k], g.second_diffs[k]
                ));
            }
        }
        s
    }
}

/// Fits and second differences for one grid's traces.
pub fn grid_series(traces: &[InterfaceTrace], delta: f64, t_range: [f64; 2], psi2_0: f64) -> GridSeries {
    let h = traces.first().map_or(0.0, |t| t.h);
    let floor = noise_floor(h, delta);
    let mut gs = GridSeries {
        h,
        times: vec![],
        c0: vec![],
        c1: vec![],
        c2: vec![],
        second_diffs: vec![],
        noise_floor: floor,
        excluded: vec![],
        sign_ok: true,
        magnitude_mismatch: None,
    };
    let mut in_range = 0;
    for tr in traces.iter().filter(|t| t.t > 0.0) {
        let fit = fit_interface_quadratic(tr, [-delta, delta]);
        let sd = second_difference(tr, delta);
        let (Ok(c), Ok(sd)) = (fit, sd) else {
            gs.excluded.push(tr.t);
            if tr.t >= t_range[0] - 1e-12 && tr.t <= t_range[1] + 1e-12 {
                gs.sign_ok = false;
            }
            continue;
        };
        gs.times.push(tr.t);
        gs.c0.push(c[0]);
        gs.c1.push(c[1]);
        gs.c2.push(c[2]);
        gs.second_diffs.push(sd);
        if tr.t >= t_range[0] - 1e-12 && tr.t <= t_range[1] + 1e-12 {
            in_range += 1;
            if !(c[2] < -floor) {
                gs.sign_ok = false;
            }
            if tr.t <= MAGNITUDE_TIME + 1e-12 {
                let expect = -tr.t * psi2_0 * delta * delta;
                let mis = ((sd - expect) / expect).abs();
                gs.magnitude_mismatch = Some(gs.magnitude_mismatch.map_or(mis, |m: f64| m.max(mis)));
            }
        }
    }
    if in_range == 0 {
        gs.sign_ok = false;
    }
    gs
}

/// FD concavity matrix at cell (i, j) with stencil spacing `s` cells.
fn fd_matrix(snap: &Snapshot, i: usize, j: usize, s: usize, alpha: f64) -> Option<ConcavityMatrix> {
    let g = snap.grid;
    if i < s || j < s || i + s >= g.n || j + s >= g.n {
        return None;
    }
    let u = |a: usize, b: usize| snap.value(a, b);
    for b in [j - s, j, j + s] {
        for a in [i - s, i, i + s] {
            if !(u(a, b) > 0.0) {
                return None;
            }
        }
    }
    let d = s as f64 * g.h;
    let v = u(i, j);
    let vx = (u(i + s, j) - u(i - s, j)) / (2.0 * d);
    let vy = (u(i, j + s) - u(i, j - s)) / (2.0 * d);
    let vxx = (u(i + s, j) - 2.0 * v + u(i - s, j)) / (d * d);
    let vyy = (u(i, j + s) - 2.0 * v + u(i, j - s)) / (d * d);
    let vxy = (u(i + s, j + s) - u(i + s, j - s) - u(i - s, j + s) + u(i - s, j - s)) / (4.0 * d * d);
    let b = 1.0 - alpha;
    Some(ConcavityMatrix {
        m11: v * vxx - b * vx * vx,
        m12: v * vxy - b * vx * vy,
        m22: v * vyy - b * vy * vy,
        alpha,
        location: g.center(i, j),
    })
}

/// Largest one-cell gradient of u across cells next to the melted boundary.
fn interface_gradient(snap: &Snapshot) -> f64 {
    let g = snap.grid;
    let mut m: f64 = 0.0;
    for j in 1..g.n - 1 {
        for i in 1..g.n - 1 {
            let c = snap.h_field[g.index(i, j)];
            if c >= 1.0 {
                continue;
            }
            for (a, b) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
                m = m.max(snap.value(a, b) / g.h);
            }
        }
    }
    m
}

/// Quadratic coefficient of the lower branch of `{u = ε}` over |x| ≤ δ.
fn contour_curvature(snap: &Snapshot, level: f64, delta: f64, y_max: f64) -> Option<f64> {
    let segs = contour_segments(&snap.u, snap.grid, level);
    let mut pts: Vec<[f64; 2]> = segs
        .iter()
        .flat_map(|s| s.iter().copied())
        .filter(|p| p[0].abs() <= delta && p[1] < y_max)
        .collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    fit_quadratic(&pts).ok().map(|c| c[2])
}

/// Search near `(0, w(0,t))` for a point where the FD concavity matrix has
/// an eigenvalue above `3×` its noise, confirmed by a nonconvex lower
/// branch of some contour `{u = ε}`.
pub fn detect_alpha_violation(
    snap: &Snapshot,
    trace: &InterfaceTrace,
    alpha: f64,
    delta: f64,
    eps_levels: Option<&[f64]>,
) -> Result<Option<AlphaWitness>> {
    let g = snap.grid;
    let w0 = trace.w_at(0.0)?;
    let region = [-delta, delta, w0, w0 + 0.25];
    let eps_floor = 5.0 * g.h * interface_gradient(snap);
    let umax = snap.u.iter().copied().fold(0.0, f64::max);
    let abs_noise = 1e-6 * umax * umax;
    let mut cand = Vec::new();
    for j in 0..g.n {
        for i in 0..g.n {
            let c = g.center(i, j);
            if c[0] < region[0] || c[0] > region[1] || c[1] < region[2] || c[1] > region[3] {
                continue;
            }
            if !(snap.value(i, j) > 3.0 * eps_floor) {
                continue;
            }
            let (Some(m1), Some(m2)) = (fd_matrix(snap, i, j, 1, alpha), fd_matrix(snap, i, j, 2, alpha)) else {
                continue;
            };
            let (l1, l2) = (m1.max_eigenvalue(), m2.max_eigenvalue());
            let noise = (l1 - l2).abs() + abs_noise;
            if l1 > WITNESS_FACTOR * noise {
                let d = c[0].hypot(c[1] - w0);
                cand.push((d, c, l1, noise));
            }
        }
    }
    if cand.is_empty() {
        return Ok(None);
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0));
    let default_levels: Vec<f64> = [3.0, 6.0, 12.0].iter().map(|k| k * eps_floor).collect();
    let levels = eps_levels.unwrap_or(&default_levels);
    let floor = noise_floor(g.h, delta);
    let confirm = levels
        .iter()
        .filter(|&&e| e > 0.0 && e < umax)
        .find_map(|&e| contour_curvature(snap, e, delta, region[3]).filter(|&c2| c2 < -floor).map(|c2| (e, c2)));
    let Some((eps_level, contour_c2)) = confirm else {
        return Ok(None);
    };
    let (_, point, eigenvalue, noise) = cand[0];
    Ok(Some(AlphaWitness { point, eigenvalue, noise, eps_level, contour_c2, t: snap.t, h: g.h }))
}

/// Assembles the report from per-grid traces and the last snapshot of
/// each grid.
pub fn detect_convexity_break(
    runs: &[(Vec<InterfaceTrace>, Snapshot)],
    alpha: f64,
    delta: f64,
    t_range: [f64; 2],
    psi2_0: f64,
) -> Result<BreakReport> {
    if runs.len() < 2 {
        return Err(Error::Diagnostic("refinement check needs at least two grids".into()));
    }
    if !runs.iter().any(|r| r.0.iter().any(|t| t.t > 0.0)) {
        return Err(Error::Diagnostic("no positive-time snapshots".into()));
    }
    let mut grids = Vec::new();
    let mut witnesses = Vec::new();
    let mut notes = Vec::new();
    for (traces, snap) in runs {
        let gs = grid_series(traces, delta, t_range, psi2_0);
        if !gs.excluded.is_empty() {
            notes.push(format!("h = {:.5}: unreliable traces at t = {:?}", gs.h, gs.excluded));
        }
        grids.push(gs);
        let tr = traces
            .iter()
            .find(|t| (t.t - snap.t).abs() < 1e-12)
            .ok_or_else(|| Error::Diagnostic(format!("no trace for the snapshot at t = {}", snap.t)))?;
        witnesses.push(if snap.t > 0.0 { detect_alpha_violation(snap, tr, alpha, delta, None)? } else { None });
    }
    let break_detected = grids.iter().all(|g| g.sign_ok);
    let magnitude_ok = grids.iter().all(|g| g.magnitude_mismatch.is_some_and(|m| m <= MAGNITUDE_TOL));
    let coarse_h = grids.iter().map(|g| g.h).fold(0.0, f64::max);
    let (witness_shift, witness_stable) = match (witnesses.first(), witnesses.last()) {
        (Some(Some(a)), Some(Some(b))) if witnesses.iter().all(|w| w.is_some()) => {
            let d = (a.point[0] - b.point[0]).hypot(a.point[1] - b.point[1]);
            (Some(d), d < 4.0 * coarse_h)
        }
        _ => (None, false),
    };
    let alpha_witness = witnesses.last().cloned().flatten();
    Ok(BreakReport {
        alpha,
        delta,
        t_range,
        grids_checked: grids.iter().map(|g| g.h).collect(),
        grids,
        break_detected,
        magnitude_ok,
        witnesses,
        alpha_witness,
        witness_shift,
        witness_stable,
        notes,
    })
}

/// Interface samples in the window as an SVG overlay, one polyline per trace.
pub fn interface_svg(traces: &[InterfaceTrace], window: [f64; 2]) -> String {
    let pts: Vec<Vec<[f64; 2]>> = traces.iter().map(|t| t.samples_in(window)).collect();
    let ys = pts.iter().flatten().map(|p| p[1]);
    let (ylo, yhi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (ylo, yhi) = if ylo.is_finite() && yhi > ylo { (ylo, yhi) } else { (0.0, 1.0) };
    let (w, hgt) = (640.0, 360.0);
    let sx = |x: f64| 20.0 + (x - window[0]) / (window[1] - window[0]) * (w - 40.0);
    let sy = |y: f64| hgt - 20.0 - (y - ylo) / (yhi - ylo) * (hgt - 40.0);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{hgt}\">\n");
    for (k, (tr, p)) in traces.iter().zip(&pts).enumerate() {
        let shade = 40 + (180 * k) / traces.len().max(1);
        let line: Vec<String> = p.iter().map(|q| format!("{:.2},{:.2}", sx(q[0]), sy(q[1]))).collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"rgb({shade},60,{})\" points=\"{}\"><title>t = {}</title></polyline>\n",
            220 - shade,
            line.join(" "),
            tr.t
        ));
    }
    s.push_str("</svg>\n");
    s
}
