//! The assembled initial datum: collar field, ε₀ search, planar extension
//! and the JSON bundle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_g, DomainSpec, DISK_CENTER, DISK_RADIUS};
use crate::jet::DerivJet;
use crate::profile::{build_profile, ProfileBundle};
use crate::psi::{choose_delta, solve_psi, PsiSolution, DEFAULT_STEP};
use crate::series::Series;

use super::coeffs::{f_floor, CoeffSet, FBlend, OuterTable, PiecewiseTaylor, REMAINDER_TERMS};
use super::collar::{scan_collar, CollarField, CollarScan};
use super::extension::Transform;
use super::planar::{build_planar_extension, CollarInput, PlanarExtension, PlanarSettings};

pub const FORMAT_VERSION: u32 = 1;
/// The collar search starts here and halves down to `COLLAR_EPS_MIN`.
pub const COLLAR_EPS_START: f64 = 0.25;
pub const COLLAR_EPS_MIN: f64 = 1e-8;
pub const COLLAR_MARGIN: f64 = 1e-6;
pub const COLLAR_SCAN_DX: f64 = 1.0 / 256.0;
pub const COLLAR_SCAN_NY: usize = 16;

/// Construction parameters; unset options take their automatic values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatumParams {
    pub alpha: f64,
    pub n: usize,
    pub q1: f64,
    pub delta: Option<f64>,
    pub blend: Option<FBlend>,
    pub collar_eps: Option<f64>,
}

impl DatumParams {
    pub fn new(alpha: f64) -> Self {
        DatumParams { alpha, n: 2, q1: -1.0, delta: None, blend: None, collar_eps: None }
    }
}

/// Full gaps between ψ and E₁, pulled in where the ψ continuation falls
/// to the floor on f.
pub fn default_blend(psi: &PsiSolution, floor: f64) -> Result<FBlend> {
    let d2 = 2.0 * psi.delta;
    let ext = psi.extended(-0.5, 0.5, floor);
    let a = (ext.x_min() + ext.step).max(-0.5);
    let d = (ext.x_max() - ext.step).min(0.5);
    if !(a < -d2 && d > d2) {
        return Err(Error::Construction(format!(
            "ψ stays above the floor {floor:.4} only on [{:.4}, {:.4}]",
            ext.x_min(),
            ext.x_max()
        )));
    }
    Ok(FBlend { left: [a, -d2], right: [d2, d] })
}

/// Largest ε = 0.25·2^-k for which the collar inequalities pass.
pub fn choose_collar_eps(field: &CollarField) -> Result<(f64, CollarScan)> {
    let mut eps = COLLAR_EPS_START;
    let mut last = None;
    while eps >= COLLAR_EPS_MIN {
        let s = scan_collar(field, eps, COLLAR_SCAN_DX, COLLAR_SCAN_NY)?;
        if s.passes(COLLAR_MARGIN) {
            return Ok((eps, s));
        }
        last = Some(s);
        eps *= 0.5;
    }
    Err(Error::Construction(format!("collar inequalities fail down to ε = {COLLAR_EPS_MIN:e}: {last:?}")))
}

/// The collar `Ω₀^{ε₀}` of the datum as seen by the planar extension.
pub struct DatumCollar<'a> {
    pub field: &'a CollarField,
    pub eps0: f64,
    /// Upper bound of g on [−1/2, 1/2].
    pub g_top: f64,
}

fn in_bottom(p: [f64; 2]) -> bool {
    p[0].abs() < 1.0 && p[1] < 1.0
}

fn radial_frame(p: [f64; 2]) -> [[f64; 2]; 2] {
    let d = [DISK_CENTER[0] - p[0], DISK_CENTER[1] - p[1]];
    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let n = [d[0] / r, d[1] / r];
    [[-n[1], n[0]], n]
}

impl CollarInput for DatumCollar<'_> {
    fn transform(&self) -> Transform {
        Transform::new(self.field.alpha())
    }

    fn v_series(&self, p: [f64; 2], depth: usize) -> Option<Series> {
        let c = &self.field.coeffs;
        if in_bottom(p) {
            let d = p[1] - c.domain.g(p[0]);
            if !(d > 0.0 && d <= self.eps0) {
                return None;
            }
            self.field.series(p[0], p[1], depth).ok()
        } else {
            let r = (p[0] - DISK_CENTER[0]).hypot(p[1] - DISK_CENTER[1]);
            if !(r < DISK_RADIUS && r >= DISK_RADIUS - self.eps0) {
                return None;
            }
            c.bundle.u_series(p[0], p[1], depth).ok()
        }
    }

    fn frame(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        if in_bottom(p) {
            [[1.0, 0.0], [0.0, 1.0]]
        } else {
            radial_frame(p)
        }
    }

    fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let r = (p[0] - DISK_CENTER[0]).hypot(p[1] - DISK_CENTER[1]);
        let arc = DISK_RADIUS - r;
        let domain = &self.field.coeffs.domain;
        // the graph piece over [−1/2, 1/2] has slope below 0.26
        let graph = if p[1] >= self.g_top {
            Some(p[1] - self.g_top)
        } else if p[0].abs() <= 0.5 {
            Some(0.96 * (p[1] - domain.g(p[0])))
        } else {
            None
        };
        match graph {
            Some(g) => arc.min(g),
            None => domain.distance_to_boundary(p),
        }
    }

    fn probe_lines(&self) -> Vec<([f64; 2], [f64; 2], f64)> {
        let domain = &self.field.coeffs.domain;
        let mut out = Vec::new();
        for j in 0..=32 {
            let x = -1.0 + j as f64 / 16.0;
            let x = x.clamp(-1.0 + 1e-9, 1.0 - 1e-9);
            out.push(([x, domain.g(x)], [0.0, 1.0], self.eps0));
        }
        let phi0 = std::f64::consts::PI / 6.0;
        let span = 2.0 * std::f64::consts::PI - 2.0 * phi0;
        for j in 0..=12 {
            let phi = phi0 + span * j as f64 / 12.0;
            let n = [phi.sin(), -phi.cos()];
            let b = [DISK_CENTER[0] + DISK_RADIUS * n[0], DISK_CENTER[1] + DISK_RADIUS * n[1]];
            if in_bottom(b) {
                continue;
            }
            out.push((b, [-n[0], -n[1]], self.eps0));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct InitialDatum {
    pub params: DatumParams,
    pub field: CollarField,
    pub eps0: f64,
    pub extension: PlanarExtension,
    pub collar_scan: Option<CollarScan>,
    g_top: f64,
}

/// Serialized form of an `InitialDatum`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatumBundle {
    pub format_version: u32,
    pub params: DatumParams,
    pub profile: ProfileBundle,
    pub domain: DomainSpec,
    pub psi: PsiSolution,
    pub blend: FBlend,
    pub tables: Vec<PiecewiseTaylor>,
    pub eps0: f64,
    pub extension: PlanarExtension,
}

fn g_top(domain: &DomainSpec) -> f64 {
    (0..=1000).map(|k| domain.g(-0.5 + k as f64 / 1000.0)).fold(f64::NEG_INFINITY, f64::max) + 1e-9
}

impl InitialDatum {
    /// Runs profile, ψ, domain, coefficients, ε₀ search and extension.
    pub fn build(params: &DatumParams) -> Result<Self> {
        let bundle = build_profile(params.alpha, params.n, params.q1)?;
        let delta = match params.delta {
            Some(d) => d,
            None => choose_delta(params.alpha)?,
        };
        let domain = build_g(delta)?;
        let psi = solve_psi(params.alpha, delta, DEFAULT_STEP)?;
        let blend = match params.blend {
            Some(b) => b,
            None => default_blend(&psi, f_floor(&bundle, &psi))?,
        };
        let coeffs = CoeffSet::build(bundle, domain, &psi, blend)?;
        let field = CollarField::new(coeffs);
        let (eps0, scan) = match params.collar_eps {
            Some(e) => (e, None),
            None => {
                let (e, s) = choose_collar_eps(&field)?;
                (e, Some(s))
            }
        };
        let top = g_top(&field.coeffs.domain);
        let extension = {
            let input = DatumCollar { field: &field, eps0, g_top: top };
            build_planar_extension(&input, PlanarSettings::default())?
        };
        let mut resolved = params.clone();
        resolved.delta = Some(delta);
        resolved.blend = Some(blend);
        resolved.collar_eps = Some(eps0);
        Ok(InitialDatum { params: resolved, field, eps0, extension, collar_scan: scan, g_top: top })
    }

    pub fn alpha(&self) -> f64 {
        self.field.alpha()
    }

    pub fn n(&self) -> usize {
        self.field.coeffs.n
    }

    pub fn delta(&self) -> f64 {
        self.field.coeffs.domain.delta
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.field.coeffs.domain
    }

    pub fn coeffs(&self) -> &CoeffSet {
        &self.field.coeffs
    }

    pub fn collar(&self) -> DatumCollar<'_> {
        DatumCollar { field: &self.field, eps0: self.eps0, g_top: self.g_top }
    }

    /// Whether `p` lies in the collar part where u₀ = v exactly.
    pub fn retains(&self, p: [f64; 2]) -> bool {
        self.extension.retains(&self.collar(), p)
    }

    /// Series of u₀ about p. Points on the boundary use the collar field.
    pub fn u0_series(&self, p: [f64; 2], depth: usize) -> Result<Series> {
        let d = self.domain();
        let r = (p[0] - DISK_CENTER[0]).hypot(p[1] - DISK_CENTER[1]);
        let on_graph = p[0].abs() < 1.0 && p[1] < 1.0 && (p[1] - d.g(p[0])).abs() <= 1e-12;
        let on_arc = (r - DISK_RADIUS).abs() <= 1e-12 && !(p[0].abs() < 0.5 && p[1] < 1.0);
        if on_graph {
            return self.field.series(p[0], p[1], depth);
        }
        if on_arc {
            return self.coeffs().bundle.u_series(p[0], p[1], depth);
        }
        if !d.contains(p) {
            return Err(Error::OutsideRegion { x: p[0], y: p[1] });
        }
        self.extension.field_series(&self.collar(), p, depth)
    }

    pub fn u0_jet(&self, p: [f64; 2], depth: usize) -> Result<DerivJet> {
        Ok(self.u0_series(p, depth)?.to_jet())
    }

    /// u₀ at p, zero outside Ω₀.
    pub fn u0_value(&self, p: [f64; 2]) -> Result<f64> {
        if !self.domain().contains(p) {
            return Ok(0.0);
        }
        let input = self.collar();
        if self.extension.is_plateau(&input, p) {
            return Ok(self.extension.transform.inverse(self.extension.cut));
        }
        Ok(self.extension.field_series(&input, p, 0)?.value())
    }

    /// `x,y,u0` rows on a uniform grid over the bounding box of Ω₀.
    pub fn sample_csv(&self, nx: usize, ny: usize) -> Result<String> {
        let mut s = String::from("x,y,u0\n");
        for j in 0..ny {
            let y = 4.0 * (j as f64 + 0.5) / ny as f64;
            for i in 0..nx {
                let x = -2.0 + 4.0 * (i as f64 + 0.5) / nx as f64;
                s.push_str(&format!("{x:.9},{y:.9},{:.12e}\n", self.u0_value([x, y])?));
            }
        }
        Ok(s)
    }

    pub fn to_bundle(&self) -> DatumBundle {
        let c = self.coeffs();
        DatumBundle {
            format_version: FORMAT_VERSION,
            params: self.params.clone(),
            profile: c.bundle.clone(),
            domain: c.domain.clone(),
            psi: c.psi.clone(),
            blend: c.blend,
            tables: c.tables.clone(),
            eps0: self.eps0,
            extension: self.extension.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_bundle())?)
    }

    pub fn from_bundle(b: DatumBundle) -> Result<Self> {
        if b.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "bundle format version {} unsupported (expected {FORMAT_VERSION})",
                b.format_version
            )));
        }
        let outer = OuterTable::build(&b.profile, 2 * b.profile.n + 1 + REMAINDER_TERMS);
        let coeffs = CoeffSet {
            n: b.profile.n,
            alpha: b.profile.alpha,
            bundle: b.profile,
            domain: b.domain,
            psi: b.psi,
            blend: b.blend,
            tables: b.tables,
            outer,
        };
        let top = g_top(&coeffs.domain);
        Ok(InitialDatum {
            params: b.params,
            field: CollarField::new(coeffs),
            eps0: b.eps0,
            extension: b.extension,
            collar_scan: None,
            g_top: top,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_bundle(serde_json::from_str(s)?)
    }
}
