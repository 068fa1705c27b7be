//! Concave extension of a collar field in the plane.
//!
//! With `w` the transformed collar field, `w̃ = min(w, a)` is concave and
//! `F_ε = η_ε * w̃` is computed by slicing the ball `B_ε(p)` along a local
//! inward direction. Each slice splits at the level curve `{w = a}`, so the
//! Hessian is a sum of `η D²w` over `{w < a}` and the jump term
//! `−η ∇w⊗∇w / ∂_ν w` along the curve, both negative semidefinite term by
//! term. Near the boundary `F = F_ε + φ(w − F_ε)` blends back to `w`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::smooth_step_series;
use crate::series::Series;

use super::extension::{eta2, rule, Transform};

/// A collar field together with the geometry needed to extend it.
pub trait CollarInput {
    fn transform(&self) -> Transform;
    /// Series of v at p, or None when p is not in the collar.
    fn v_series(&self, p: [f64; 2], depth: usize) -> Option<Series>;
    /// Tangent and inward unit vectors used to slice balls centred at p.
    fn frame(&self, p: [f64; 2]) -> [[f64; 2]; 2];
    /// A lower bound for the distance from p to the boundary.
    fn boundary_distance(&self, p: [f64; 2]) -> f64;
    /// Lines `(boundary point, inward unit direction, length)` crossing the collar.
    fn probe_lines(&self) -> Vec<([f64; 2], [f64; 2], f64)>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarExtension {
    pub transform: Transform,
    /// Truncation level a.
    pub cut: f64,
    /// φ = 0 for w ≥ blend_hi, φ = 1 for w ≤ blend_lo.
    pub blend_hi: f64,
    pub blend_lo: f64,
    pub eps: f64,
    /// Bound on the distance from `{w = a}` to the boundary.
    pub cut_depth: f64,
    pub slices: usize,
    pub nodes: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct Accum {
    f: f64,
    g: [f64; 2],
    h: [f64; 3],
}

fn at(p: [f64; 2], e: [[f64; 2]; 2], tau: f64, nu: f64) -> [f64; 2] {
    [p[0] + tau * e[0][0] + nu * e[1][0], p[1] + tau * e[0][1] + nu * e[1][1]]
}

impl PlanarExtension {
    pub fn w_series(&self, input: &dyn CollarInput, p: [f64; 2], depth: usize) -> Option<Series> {
        input.v_series(p, depth).map(|v| self.transform.forward_series(&v))
    }

    fn w_value(&self, input: &dyn CollarInput, p: [f64; 2]) -> Option<f64> {
        self.w_series(input, p, 0).map(|s| s.value())
    }

    pub fn is_plateau(&self, input: &dyn CollarInput, p: [f64; 2]) -> bool {
        input.boundary_distance(p) > self.cut_depth + self.eps
    }

    /// ν in (lo, hi) with w = a on the slice, given w(lo) < a ≤ w(hi).
    fn crossing(&self, input: &dyn CollarInput, p: [f64; 2], e: [[f64; 2]; 2], tau: f64, lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        let tol = (1e-12 * self.eps).max(4e-16 * (p[0].abs() + p[1].abs() + 1.0));
        let mut nu = 0.5 * (lo + hi);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let q = at(p, e, tau, nu);
            let next = match self.w_series(input, q, 1) {
                Some(s) => {
                    let d = s.value() - self.cut;
                    if d < 0.0 {
                        lo = nu;
                    } else {
                        hi = nu;
                    }
                    let dn = s.coeff(1, 0) * e[1][0] + s.coeff(0, 1) * e[1][1];
                    let step = nu - d / dn;
                    if dn > 0.0 && step > lo && step < hi {
                        step
                    } else {
                        0.5 * (lo + hi)
                    }
                }
                None => {
                    hi = nu;
                    0.5 * (lo + hi)
                }
            };
            if (next - nu).abs() <= tol {
                nu = next;
                break;
            }
            nu = next;
        }
        nu
    }

    fn mollified_accum(&self, input: &dyn CollarInput, p: [f64; 2], depth: usize) -> Result<Accum> {
        let e = input.frame(p);
        let eps = self.eps;
        let (tx, tw) = rule(self.slices);
        let (nx, nw) = rule(self.nodes);
        let norm = 1.0 / (eps * eps);
        let mut acc = Accum::default();
        for (&ti, &twi) in tx.iter().zip(tw) {
            let tau = eps * ti;
            let wt = eps * twi;
            let c = (eps * eps - tau * tau).max(0.0).sqrt();
            // off the collar only above it: the ball radius is below the
            // depth of the blend region
            match self.w_value(input, at(p, e, tau, -c)) {
                Some(b) if b < self.cut => {}
                _ => continue,
            }
            let top = self.w_value(input, at(p, e, tau, c));
            let upper = match top {
                Some(t) if t < self.cut => c,
                _ => self.crossing(input, p, e, tau, -c, c),
            };
            let (m, h) = (0.5 * (upper - c), 0.5 * (upper + c));
            for (&xi, &wi) in nx.iter().zip(nw) {
                let nu = m + h * xi;
                let k = eta2((tau * tau + nu * nu).sqrt() / eps)[0] * norm * wt * wi * h;
                if k == 0.0 {
                    continue;
                }
                let s = self
                    .w_series(input, at(p, e, tau, nu), depth)
                    .ok_or_else(|| Error::Construction(format!("slice point near {p:?} outside the collar")))?;
                acc.f += k * (s.value() - self.cut);
                if depth >= 1 {
                    acc.g[0] += k * s.coeff(1, 0);
                    acc.g[1] += k * s.coeff(0, 1);
                }
                if depth >= 2 {
                    acc.h[0] += k * 2.0 * s.coeff(2, 0);
                    acc.h[1] += k * s.coeff(1, 1);
                    acc.h[2] += k * 2.0 * s.coeff(0, 2);
                }
            }
            if depth >= 2 && upper < c {
                let k = eta2((tau * tau + upper * upper).sqrt() / eps)[0] * norm * wt;
                if k > 0.0 {
                    let s = self
                        .w_series(input, at(p, e, tau, upper), 1)
                        .ok_or_else(|| Error::Construction(format!("level curve near {p:?} outside the collar")))?;
                    let g = [s.coeff(1, 0), s.coeff(0, 1)];
                    let dn = g[0] * e[1][0] + g[1] * e[1][1];
                    if !(dn > 0.0) {
                        return Err(Error::Construction(format!(
                            "field not increasing inward at the level curve near {p:?}"
                        )));
                    }
                    acc.h[0] -= k * g[0] * g[0] / dn;
                    acc.h[1] -= k * g[0] * g[1] / dn;
                    acc.h[2] -= k * g[1] * g[1] / dn;
                }
            }
        }
        Ok(acc)
    }

    /// `F_ε` at p as a bivariate series of depth ≤ 2.
    pub fn mollified(&self, input: &dyn CollarInput, p: [f64; 2], depth: usize) -> Result<Series> {
        if depth > 2 {
            return Err(Error::OrderUnavailable { order: depth, region: "the mollified extension" });
        }
        let mut s = Series::constant(2, depth, self.cut);
        if self.is_plateau(input, p) {
            return Ok(s);
        }
        let acc = self.mollified_accum(input, p, depth)?;
        s.set_coeff(0, 0, self.cut + acc.f);
        if depth >= 1 {
            s.set_coeff(1, 0, acc.g[0]);
            s.set_coeff(0, 1, acc.g[1]);
        }
        if depth >= 2 {
            s.set_coeff(2, 0, 0.5 * acc.h[0]);
            s.set_coeff(1, 1, acc.h[1]);
            s.set_coeff(0, 2, 0.5 * acc.h[2]);
        }
        Ok(s)
    }

    /// Weight of the collar field as a series in terms of the w series.
    pub fn blend_weight(&self, w: &Series) -> Series {
        smooth_step_series(&((self.blend_hi - w) * (1.0 / (self.blend_hi - self.blend_lo))))
    }

    /// Extended transform F at p.
    pub fn transform_series(&self, input: &dyn CollarInput, p: [f64; 2], depth: usize) -> Result<Series> {
        if self.is_plateau(input, p) {
            return Ok(Series::constant(2, depth, self.cut));
        }
        if let Some(w) = self.w_series(input, p, depth) {
            if w.value() <= self.blend_lo {
                return Ok(w);
            }
            if depth > 2 {
                return Err(Error::OrderUnavailable { order: depth, region: "the mollified extension" });
            }
            let fe = self.mollified(input, p, depth)?;
            if w.value() >= self.blend_hi {
                return Ok(fe);
            }
            let phi = self.blend_weight(&w);
            return Ok(&fe + &(&phi * &(&w - &fe)));
        }
        self.mollified(input, p, depth)
    }

    /// Extended field v = T⁻¹(F) at p.
    pub fn field_series(&self, input: &dyn CollarInput, p: [f64; 2], depth: usize) -> Result<Series> {
        if !self.is_plateau(input, p) {
            if let Some(v) = input.v_series(p, depth) {
                if self.transform.forward(v.value()) <= self.blend_lo {
                    return Ok(v);
                }
            }
        }
        Ok(self.transform.inverse_series(&self.transform_series(input, p, depth)?))
    }

    /// Whether p lies where the extension equals the collar field.
    pub fn retains(&self, input: &dyn CollarInput, p: [f64; 2]) -> bool {
        !self.is_plateau(input, p) && self.w_value(input, p).is_some_and(|w| w <= self.blend_lo)
    }
}

/// Offset along a probe line where w first reaches `level`.
fn level_offset(input: &dyn CollarInput, tr: Transform, line: &([f64; 2], [f64; 2], f64), level: f64) -> Option<f64> {
    let (b, d, len) = *line;
    let w = |t: f64| input.v_series([b[0] + t * d[0], b[1] + t * d[1]], 0).map(|s| tr.forward(s.value()));
    let (mut lo, mut hi) = (0.0, len);
    match w(hi) {
        Some(v) if v < level => return None,
        _ => {}
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        match w(m) {
            Some(v) if v < level => lo = m,
            _ => hi = m,
        }
        if hi - lo <= 1e-15 * len {
            break;
        }
    }
    Some(hi)
}

/// Extension settings: truncation at the v-level `cut_fraction·min v` over
/// the probe lines at `cut_fraction` of their length, blend between
/// 1/2 and 2/3 of that level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarSettings {
    pub cut_fraction: f64,
    pub slices: usize,
    pub nodes: usize,
    pub max_halvings: usize,
    pub probes_per_line: usize,
}

impl Default for PlanarSettings {
    fn default() -> Self {
        PlanarSettings { cut_fraction: 0.75, slices: 24, nodes: 16, max_halvings: 14, probes_per_line: 12 }
    }
}

/// Largest eigenvalue of a symmetric 2×2 matrix [xx, xy, yy].
pub fn max_eigenvalue(h: [f64; 3]) -> f64 {
    let m = 0.5 * (h[0] + h[2]);
    let r = (0.25 * (h[0] - h[2]).powi(2) + h[1] * h[1]).sqrt();
    m + r
}

pub fn build_planar_extension(input: &dyn CollarInput, settings: PlanarSettings) -> Result<PlanarExtension> {
    let tr = input.transform();
    let lines = input.probe_lines();
    if lines.is_empty() {
        return Err(Error::Construction("no probe lines".into()));
    }
    let mut vcut = f64::INFINITY;
    for l in &lines {
        let (b, d, len) = *l;
        let t = settings.cut_fraction * len;
        let v = input
            .v_series([b[0] + t * d[0], b[1] + t * d[1]], 0)
            .ok_or_else(|| Error::Construction(format!("probe point at offset {t} off the collar")))?
            .value();
        vcut = vcut.min(v);
    }
    if !(vcut > 0.0) {
        return Err(Error::Construction(format!("collar field not positive on the probe lines ({vcut})")));
    }
    let cut = tr.forward(vcut);
    let blend_hi = tr.forward(vcut * 2.0 / 3.0);
    let blend_lo = tr.forward(vcut * 0.5);
    let mut cut_depth: f64 = 0.0;
    let mut lo_depth = f64::INFINITY;
    for l in &lines {
        let dc = level_offset(input, tr, l, cut)
            .ok_or_else(|| Error::Construction("truncation level not reached on a probe line".into()))?;
        cut_depth = cut_depth.max(dc);
        if let Some(dl) = level_offset(input, tr, l, blend_lo) {
            lo_depth = lo_depth.min(dl);
        }
    }
    // probe lines sample the level curve; pad the bound on its depth
    cut_depth *= 1.25;
    let mut eps = 1.0;
    while eps > 0.5 * lo_depth {
        eps *= 0.5;
    }
    let mut last = String::new();
    for _ in 0..=settings.max_halvings {
        let ext = PlanarExtension {
            transform: tr,
            cut,
            blend_hi,
            blend_lo,
            eps,
            cut_depth,
            slices: settings.slices,
            nodes: settings.nodes,
        };
        match check_planar_concavity(&ext, input, &lines, settings.probes_per_line) {
            Ok(()) => return Ok(ext),
            Err(msg) => last = msg,
        }
        eps *= 0.5;
    }
    Err(Error::Construction(format!("planar extension not concave: {last}")))
}

fn check_planar_concavity(
    ext: &PlanarExtension,
    input: &dyn CollarInput,
    lines: &[([f64; 2], [f64; 2], f64)],
    per_line: usize,
) -> std::result::Result<(), String> {
    for l in lines {
        let (b, d, _) = *l;
        let top = ext.cut_depth / 1.25 + 1.5 * ext.eps;
        let start = level_offset(input, ext.transform, l, ext.blend_lo).unwrap_or(0.0);
        for k in 0..per_line {
            let t = start + (top - start) * (k as f64 + 0.5) / per_line as f64;
            let p = [b[0] + t * d[0], b[1] + t * d[1]];
            let f = ext.transform_series(input, p, 2).map_err(|e| e.to_string())?;
            let h = [2.0 * f.coeff(2, 0), f.coeff(1, 1), 2.0 * f.coeff(0, 2)];
            let eig = max_eigenvalue(h);
            let in_blend = ext.w_value(input, p).is_some_and(|w| w < ext.blend_hi);
            let scale = h[0].abs() + h[2].abs();
            let bad = if in_blend { !(eig < 0.0) } else { eig > 1e-12 * scale };
            if bad {
                return Err(format!("eps = {:e}: eigenvalue {eig:e} at {p:?}", ext.eps));
            }
        }
    }
    Ok(())
}
