//! The disk D, the circle graph G, the flattened lower boundary g and Ω₀.
//!
//! On each gap between the flat segment and the circle, g'' is modelled as
//!
//! ```text
//! m(x) = σ((t − t_s)/(1 − t_s))·G''(x) + A₁ b(t; p₁)/L + A₂ b(t; p₂)/L,
//! t = (|x| − δ)/L,  L = 1/2 − δ,  b(t; p) = exp(−p/t − 1/(1−t)),
//! ```
//!
//! with σ a C∞ step. `m` is flat at `t = 0` and equals G'' to all orders at
//! `t = 1`. g is obtained by integrating `m` twice from the circle end, and
//! the amplitudes are the solution of the 2×2 linear system `g(δ) = 1/20`,
//! `g'(δ) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use std::sync::OnceLock;

use crate::quadrature::{gauss_legendre, gauss_legendre_on};
use crate::series::Series;

pub const FLAT_LEVEL: f64 = 0.05;
pub const DISK_CENTER: [f64; 2] = [0.0, 2.0];
pub const DISK_RADIUS: f64 = 2.0;
const KNOTS: usize = 1024;
const PANEL_RULE: usize = 16;
const EXP_FLOOR: f64 = -700.0;

/// Exact derivative of `G(x) = 2 − √(4 − x²)`.
pub fn eval_g_circle(x: f64, order: usize) -> Result<f64> {
    if x.abs() >= 2.0 {
        return Err(Error::InvalidParameter(format!("G is defined for |x| < 2, got {x}")));
    }
    Ok(g_circle_series(x, order).derivative(order, 0))
}

pub fn g_circle_series(x: f64, depth: usize) -> Series {
    let xs = Series::var(1, depth, 0, x);
    2.0 - (4.0 - &xs * &xs).sqrt()
}

fn g_circle(x: f64) -> f64 {
    2.0 - (4.0 - x * x).sqrt()
}

fn bump_value(t: f64, p: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = -p / t - 1.0 / (1.0 - t);
    if a < EXP_FLOOR {
        0.0
    } else {
        a.exp()
    }
}

fn bump_series(t: &Series, p: f64) -> Series {
    let t0 = t.value();
    if t0 <= 0.0 || t0 >= 1.0 {
        return t.scale(0.0);
    }
    if -p / t0 - 1.0 / (1.0 - t0) < EXP_FLOOR {
        return t.scale(0.0);
    }
    let a = -(t.recip().scale(p)) - (1.0 - t).recip();
    a.exp()
}

/// C∞ step: 0 for s ≤ 0, 1 for s ≥ 1.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = bump_half(s);
        let b = bump_half(1.0 - s);
        a / (a + b)
    }
}

fn bump_half(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        let a = -1.0 / s;
        if a < EXP_FLOOR {
            0.0
        } else {
            a.exp()
        }
    }
}

fn bump_half_series(s: &Series) -> Series {
    let s0 = s.value();
    if s0 <= 0.0 || -1.0 / s0 < EXP_FLOOR {
        return s.scale(0.0);
    }
    (-s.recip()).exp()
}

pub fn smooth_step_series(s: &Series) -> Series {
    let s0 = s.value();
    if s0 <= 0.0 {
        return s.scale(0.0);
    }
    if s0 >= 1.0 {
        return s.scale(0.0).add_scalar(1.0);
    }
    let a = bump_half_series(s);
    let b = bump_half_series(&(1.0 - s));
    if b.value() == 0.0 {
        return s.scale(0.0).add_scalar(1.0);
    }
    if a.value() == 0.0 {
        return s.scale(0.0);
    }
    &a / &(&a + &b)
}

/// One side of the blend in the reflected coordinate `|x|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendCurve {
    /// −1 for the left gap, +1 for the right gap.
    pub side: i8,
    pub t_step: f64,
    pub exponents: [f64; 2],
    /// Amplitudes of the unit-mass bumps and the masses of the raw bumps on [0, 1].
    pub amplitudes: [f64; 2],
    pub bump_norms: [f64; 2],
    /// g(1/2) and g'(1/2) on the reflected side, the constants of integration.
    pub circle_value: f64,
    pub circle_slope: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DomainData {
    delta: f64,
    flat_level: f64,
    g_blend: [BlendCurve; 2],
    disk_center: [f64; 2],
    disk_radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "DomainData", into = "DomainData")]
pub struct DomainSpec {
    pub delta: f64,
    pub flat_level: f64,
    pub g_blend: [BlendCurve; 2],
    pub disk_center: [f64; 2],
    pub disk_radius: f64,
    knots: Vec<f64>,
    /// ∫_{x_k}^{1/2} m and ∫_{x_k}^{1/2} s·m(s) ds at the knots.
    cum0: Vec<f64>,
    cum1: Vec<f64>,
}

impl From<DomainData> for DomainSpec {
    fn from(d: DomainData) -> Self {
        let mut s = DomainSpec {
            delta: d.delta,
            flat_level: d.flat_level,
            g_blend: d.g_blend,
            disk_center: d.disk_center,
            disk_radius: d.disk_radius,
            knots: vec![],
            cum0: vec![],
            cum1: vec![],
        };
        s.tabulate();
        s
    }
}

impl From<DomainSpec> for DomainData {
    fn from(s: DomainSpec) -> Self {
        DomainData {
            delta: s.delta,
            flat_level: s.flat_level,
            g_blend: s.g_blend,
            disk_center: s.disk_center,
            disk_radius: s.disk_radius,
        }
    }
}

impl PartialEq for DomainSpec {
    fn eq(&self, o: &Self) -> bool {
        self.delta == o.delta && self.g_blend == o.g_blend
    }
}

/// Integrals of one g''-component over [δ, 1/2]: (∫φ, ∫(s−δ)φ).
fn moments(delta: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let panels = 400;
    let len = 0.5 - delta;
    let (mut j0, mut j1) = (0.0, 0.0);
    for k in 0..panels {
        let a = delta + len * k as f64 / panels as f64;
        let b = delta + len * (k + 1) as f64 / panels as f64;
        for (x, w) in gauss_legendre_on(PANEL_RULE, a, b) {
            let v = f(x);
            j0 += w * v;
            j1 += w * (x - delta) * v;
        }
    }
    (j0, j1)
}

const CANDIDATES: [(f64, [f64; 2]); 6] = [
    (0.5, [0.5, 64.0]),
    (0.5, [0.5, 144.0]),
    (0.7, [0.5, 144.0]),
    (0.7, [0.5, 400.0]),
    (0.85, [0.5, 400.0]),
    (0.85, [0.2, 900.0]),
];

/// Builds the flattened domain for a flat half-width `delta`.
pub fn build_g(delta: f64) -> Result<DomainSpec> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::InvalidParameter(format!("delta must be in (0, 1/4), got {delta}")));
    }
    let len = 0.5 - delta;
    let g_half = g_circle(0.5);
    let dg_half = eval_g_circle(0.5, 1)?;
    let mut last = String::new();
    for (t_step, p) in CANDIDATES {
        let base = |x: f64| {
            let t = (x - delta) / len;
            smooth_step((t - t_step) / (1.0 - t_step)) * g_circle_dd(x)
        };
        let (b0, b1) = moments(delta, base);
        let norms = [moments(0.0, |t| bump_value(2.0 * t, p[0])).0 * 2.0, moments(0.0, |t| bump_value(2.0 * t, p[1])).0 * 2.0];
        let (p0, p1) = moments(delta, |x| bump_value((x - delta) / len, p[0]) / (norms[0] * len));
        let (q0, q1) = moments(delta, |x| bump_value((x - delta) / len, p[1]) / (norms[1] * len));
        // g'(δ) = G'(1/2) − ∫m = 0 and g(δ) = G(1/2) − G'(1/2)L + ∫(s−δ)m = 1/20.
        let r0 = dg_half - b0;
        let r1 = FLAT_LEVEL - g_half + dg_half * len - b1;
        let det = p0 * q1 - q0 * p1;
        let a1 = (r0 * q1 - q0 * r1) / det;
        let a2 = (p0 * r1 - r0 * p1) / det;
        if !(a1 > 0.0 && a2 > 0.0) {
            last = format!("t_step={t_step}, p={p:?}: amplitudes {a1:.4e}, {a2:.4e}");
            continue;
        }
        let curve = |side| BlendCurve {
            side,
            t_step,
            exponents: p,
            amplitudes: [a1, a2],
            bump_norms: norms,
            circle_value: g_half,
            circle_slope: dg_half,
        };
        let spec: DomainSpec = DomainData {
            delta,
            flat_level: FLAT_LEVEL,
            g_blend: [curve(-1), curve(1)],
            disk_center: DISK_CENTER,
            disk_radius: DISK_RADIUS,
        }
        .into();
        return Ok(spec);
    }
    Err(Error::Construction(format!("no positive g'' amplitude pair found ({last})")))
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_RULE))
}

fn g_circle_dd(x: f64) -> f64 {
    4.0 / (4.0 - x * x).powf(1.5)
}

impl DomainSpec {
    fn len(&self) -> f64 {
        0.5 - self.delta
    }

    /// g'' on the right gap at `x ∈ [δ, 1/2]`.
    pub fn m_value(&self, x: f64) -> f64 {
        let c = &self.g_blend[1];
        let len = self.len();
        let t = (x - self.delta) / len;
        smooth_step((t - c.t_step) / (1.0 - c.t_step)) * g_circle_dd(x)
            + c.amplitudes[0] * bump_value(t, c.exponents[0]) / (c.bump_norms[0] * len)
            + c.amplitudes[1] * bump_value(t, c.exponents[1]) / (c.bump_norms[1] * len)
    }

    fn m_series(&self, x: f64, depth: usize) -> Series {
        let c = &self.g_blend[1];
        let len = self.len();
        let xs = Series::var(1, depth, 0, x);
        let t = (&xs - self.delta) / len;
        let s = (&t - c.t_step) / (1.0 - c.t_step);
        let gdd = 4.0 * (4.0 - &xs * &xs).powf(-1.5);
        smooth_step_series(&s) * gdd
            + bump_series(&t, c.exponents[0]).scale(c.amplitudes[0] / (c.bump_norms[0] * len))
            + bump_series(&t, c.exponents[1]).scale(c.amplitudes[1] / (c.bump_norms[1] * len))
    }

    fn tabulate(&mut self) {
        let (d, len) = (self.delta, self.len());
        self.knots = (0..=KNOTS).map(|k| d + len * k as f64 / KNOTS as f64).collect();
        self.cum0 = vec![0.0; KNOTS + 1];
        self.cum1 = vec![0.0; KNOTS + 1];
        for k in (0..KNOTS).rev() {
            let (i0, i1) = self.panel(self.knots[k], self.knots[k + 1]);
            self.cum0[k] = self.cum0[k + 1] + i0;
            self.cum1[k] = self.cum1[k + 1] + i1;
        }
    }

    fn panel(&self, a: f64, b: f64) -> (f64, f64) {
        let (mut i0, mut i1) = (0.0, 0.0);
        if b > a {
            let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
            for (&xi, &wi) in panel_rule().0.iter().zip(panel_rule().1.iter()) {
                let (s, w) = (m + r * xi, r * wi);
                let v = self.m_value(s);
                i0 += w * v;
                i1 += w * s * v;
            }
        }
        (i0, i1)
    }

    /// (g, g') on the right gap.
    fn blend_value(&self, x: f64) -> (f64, f64) {
        let len = self.len();
        let k = (((x - self.delta) / len) * KNOTS as f64).floor().clamp(0.0, (KNOTS - 1) as f64) as usize;
        let (p0, p1) = self.panel(x, self.knots[k + 1]);
        let i0 = self.cum0[k + 1] + p0;
        let i1 = self.cum1[k + 1] + p1;
        let c = &self.g_blend[1];
        let g = c.circle_value - c.circle_slope * (0.5 - x) + i1 - x * i0;
        (g, c.circle_slope - i0)
    }

    /// g(x) for |x| < 2.
    pub fn g(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= self.delta {
            self.flat_level
        } else if a >= 0.5 {
            g_circle(a)
        } else {
            self.blend_value(a).0
        }
    }

    /// Taylor coefficients of g about `x`.
    pub fn g_series(&self, x: f64, depth: usize) -> Series {
        let a = x.abs();
        if a >= 0.5 {
            return g_circle_series(x, depth);
        }
        if a <= self.delta {
            return Series::constant(1, depth, self.flat_level);
        }
        let (g, dg) = self.blend_value(a);
        let mut c = vec![0.0; depth + 1];
        c[0] = g;
        if depth >= 1 {
            c[1] = dg;
        }
        if depth >= 2 {
            let m = self.m_series(a, depth - 2);
            for k in 0..=depth - 2 {
                c[k + 2] = m.coeff(k, 0) / ((k + 1) * (k + 2)) as f64;
            }
        }
        if x < 0.0 {
            for (k, v) in c.iter_mut().enumerate() {
                if k % 2 == 1 {
                    *v = -*v;
                }
            }
        }
        Series::from_coeffs(c)
    }

    pub fn g_derivative(&self, x: f64, order: usize) -> f64 {
        self.g_series(x, order).derivative(order, 0)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.disk_center[0];
        let dy = p[1] - self.disk_center[1];
        if dx * dx + dy * dy >= self.disk_radius * self.disk_radius {
            return false;
        }
        p[0].abs() >= 2.0 || p[1] > self.g(p[0])
    }

    /// Distance from an interior point to ∂Ω₀.
    pub fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        let dx = p[0] - self.disk_center[0];
        let dy = p[1] - self.disk_center[1];
        let r = (dx * dx + dy * dy).sqrt();
        // Nearest circle point lies on the arc part unless it falls in the bottom cap.
        let foot = if r > 0.0 {
            [self.disk_center[0] + 2.0 * dx / r, self.disk_center[1] + 2.0 * dy / r]
        } else {
            [0.0, 4.0]
        };
        let d_arc = if foot[0].abs() >= 0.5 || foot[1] > 1.0 {
            self.disk_radius - r
        } else {
            let e = [0.5, g_circle(0.5)];
            let d1 = ((p[0] - e[0]).powi(2) + (p[1] - e[1]).powi(2)).sqrt();
            let d2 = ((p[0] + e[0]).powi(2) + (p[1] - e[1]).powi(2)).sqrt();
            d1.min(d2)
        };
        let f = |s: f64| ((p[0] - s).powi(2) + (p[1] - self.g(s)).powi(2)).sqrt();
        let n = 64;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=n {
            let s = -0.5 + k as f64 / n as f64;
            let v = f(s);
            if v < best.0 {
                best = (v, s);
            }
        }
        // golden-section refinement around the best sample
        let (mut a, mut b) = ((best.1 - 1.0 / n as f64).max(-0.5), (best.1 + 1.0 / n as f64).min(0.5));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..60 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
        }
        d_arc.min(fc.min(fd)).min(best.0)
    }

    fn graph_arclength(&self) -> Vec<(f64, f64)> {
        let n = 4000;
        let mut out = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        let mut prev = None;
        for k in 0..=n {
            let x = -0.5 + k as f64 / n as f64;
            let d = self.g_derivative(x, 1);
            let w = (1.0 + d * d).sqrt();
            if let Some((px, pw)) = prev {
                s += 0.5 * (w + pw) * (x - px);
            }
            out.push((x, s));
            prev = Some((x, w));
        }
        out
    }

    /// Points tracing ∂Ω₀ once counterclockwise from (−1/2, G(1/2)), with
    /// outward unit normals and arc-length parameter.
    pub fn boundary_samples(&self, n: usize) -> Result<Vec<BoundarySample>> {
        if n < 8 {
            return Err(Error::InvalidParameter("boundary_samples needs n ≥ 8".into()));
        }
        let table = self.graph_arclength();
        let lg = table.last().unwrap().1;
        let theta0 = (0.25f64).asin();
        let arc = self.disk_radius * (2.0 * std::f64::consts::PI - 2.0 * theta0);
        let total = lg + arc;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let s = total * k as f64 / n as f64;
            if s < lg {
                let i = table.partition_point(|e| e.1 < s).clamp(1, table.len() - 1);
                let (x0, s0) = table[i - 1];
                let (x1, s1) = table[i];
                let x = x0 + (x1 - x0) * (s - s0) / (s1 - s0);
                let d = self.g_derivative(x, 1);
                let nn = (1.0 + d * d).sqrt();
                out.push(BoundarySample { point: [x, self.g(x)], normal: [d / nn, -1.0 / nn], arc: s });
            } else {
                // angle measured from the downward direction, counterclockwise
                let phi = theta0 + (s - lg) / 2.0;
                let nrm = [phi.sin(), -phi.cos()];
                let pt = [self.disk_center[0] + 2.0 * nrm[0], self.disk_center[1] + 2.0 * nrm[1]];
                out.push(BoundarySample { point: pt, normal: nrm, arc: s });
            }
        }
        Ok(out)
    }

    pub fn boundary_csv(&self, n: usize) -> Result<String> {
        let mut s = String::from("x,y,nx,ny,arc\n");
        for b in self.boundary_samples(n)? {
            s.push_str(&format!(
                "{:.12},{:.12},{:.12},{:.12},{:.12}\n",
                b.point[0], b.point[1], b.normal[0], b.normal[1], b.arc
            ));
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub point: [f64; 2],
    pub normal: [f64; 2],
    pub arc: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_values() {
        assert_eq!(eval_g_circle(0.0, 0).unwrap(), 0.0);
        assert!((eval_g_circle(1.0, 0).unwrap() - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!((eval_g_circle(0.0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(eval_g_circle(2.0, 0).is_err());
    }

    #[test]
    fn flat_and_circle_parts() {
        let d = build_g(0.2).unwrap();
        assert_eq!(d.g(0.0), 0.05);
        assert_eq!(d.g(0.75), g_circle(0.75));
        assert!((d.g(0.2 + 1e-9) - 0.05).abs() < 1e-12);
        assert!((d.g(0.5 - 1e-12) - g_circle(0.5)).abs() < 1e-12);
        assert!(d.g_derivative(0.2 + 1e-9, 1).abs() < 1e-12);
    }

    #[test]
    fn membership() {
        let d = build_g(0.2).unwrap();
        assert!(d.contains([0.0, 1.0]));
        assert!(!d.contains([0.0, 0.04]));
        assert!(!d.contains([0.0, 4.1]));
    }

    #[test]
    fn boundary_normals() {
        let d = build_g(0.2).unwrap();
        let b = d.boundary_samples(400).unwrap();
        for s in &b {
            let n = (s.normal[0].powi(2) + s.normal[1].powi(2)).sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        let flat = b
            .iter()
            .filter(|s| s.point[1] < 1.0)
            .min_by(|a, b| a.point[0].abs().total_cmp(&b.point[0].abs()))
            .unwrap();
        assert!(flat.normal[1] < -0.999999);
    }
}
