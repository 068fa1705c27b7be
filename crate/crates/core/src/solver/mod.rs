//! Fixed-grid enthalpy solver for the one-phase Stefan problem.
//!
//! `H = u + χ` with unit latent heat; `u = max(H − 1, 0)` and
//! `H_t = Δu`. Cells with `0 < H < 1` are mushy and count as solid for u.

pub mod interface;
pub mod planar;
pub mod radial;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initdata::datum::InitialDatum;

pub const BOX: [f64; 4] = [-2.2, 2.2, -0.2, 4.2];
pub const DT_SAFETY: f64 = 0.9;
/// Subsamples per axis for the volume fraction of cut cells.
pub const SUBSAMPLES: usize = 4;

/// Initial data for the solver: a domain and a temperature on it.
pub trait InitialField {
    fn contains(&self, p: [f64; 2]) -> bool;
    fn value(&self, p: [f64; 2]) -> Result<f64>;
}

impl InitialField for InitialDatum {
    fn contains(&self, p: [f64; 2]) -> bool {
        self.domain().contains(p)
    }

    fn value(&self, p: [f64; 2]) -> Result<f64> {
        self.u0_value(p)
    }
}

/// Uniform cell-centred grid over `BOX`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        let h = (BOX[1] - BOX[0]) / n as f64;
        if n < 8 || h > 0.02 + 1e-12 {
            return Err(Error::InvalidParameter(format!("grid of {n} cells gives h = {h}, need h ≤ 0.02")));
        }
        Ok(Grid { n, h, x0: BOX[0], y0: BOX[2] })
    }

    /// Grid with spacing h, which must divide the box.
    pub fn with_spacing(h: f64) -> Result<Self> {
        let n = ((BOX[1] - BOX[0]) / h).round();
        if !(h > 0.0) || ((BOX[1] - BOX[0]) / n - h).abs() > 1e-9 * h {
            return Err(Error::InvalidParameter(format!("h = {h} does not divide the box")));
        }
        Self::new(n as usize)
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x0 + (i as f64 + 0.5) * self.h, self.y0 + (j as f64 + 0.5) * self.h]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn stable_dt(&self) -> f64 {
        DT_SAFETY * self.h * self.h / 4.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnthalpyState {
    pub grid: Grid,
    pub h_field: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub steps: u64,
}

fn temperature(h: &[f64], u: &mut [f64]) {
    for (u, &h) in u.iter_mut().zip(h) {
        *u = (h - 1.0).max(0.0);
    }
}

/// Cell enthalpies from an initial field on the given grid.
pub fn init_enthalpy(field: &dyn InitialField, grid: Grid) -> Result<EnthalpyState> {
    let n = grid.n;
    let mut hf = vec![0.0; n * n];
    let m = SUBSAMPLES;
    for j in 0..n {
        for i in 0..n {
            let c = grid.center(i, j);
            let mut inside = 0usize;
            for b in 0..m {
                for a in 0..m {
                    let p = [
                        c[0] + grid.h * ((a as f64 + 0.5) / m as f64 - 0.5),
                        c[1] + grid.h * ((b as f64 + 0.5) / m as f64 - 0.5),
                    ];
                    if field.contains(p) {
                        inside += 1;
                    }
                }
            }
            if inside == 0 {
                continue;
            }
            let u0 = if field.contains(c) { field.value(c)? } else { 0.0 };
            let frac = inside as f64 / (m * m) as f64;
            hf[grid.index(i, j)] = if inside == m * m { u0 + 1.0 } else { frac * (u0 + 1.0) };
        }
    }
    let mut u = vec![0.0; n * n];
    temperature(&hf, &mut u);
    Ok(EnthalpyState { grid, h_field: hf, u, t: 0.0, dt: grid.stable_dt(), steps: 0 })
}

impl EnthalpyState {
    pub fn total_enthalpy(&self) -> f64 {
        self.h_field.iter().sum::<f64>() * self.grid.h * self.grid.h
    }

    pub fn liquid_fraction(&self, i: usize, j: usize) -> f64 {
        self.h_field[self.grid.index(i, j)].clamp(0.0, 1.0)
    }

    /// One explicit step of `H += dt·Δ_h u` with zero-flux box edges.
    pub fn step(&mut self) -> Result<()> {
        self.step_dt(self.dt)
    }

    fn step_dt(&mut self, dt: f64) -> Result<()> {
        let n = self.grid.n;
        let k = dt / (self.grid.h * self.grid.h);
        temperature(&self.h_field, &mut self.u);
        let u = &self.u;
        for j in 0..n {
            let row = j * n;
            let up = if j + 1 < n { row + n } else { row };
            let dn = if j > 0 { row - n } else { row };
            let hr = &mut self.h_field[row..row + n];
            for i in 0..n {
                let c = u[row + i];
                let w = if i > 0 { u[row + i - 1] } else { c };
                let e = if i + 1 < n { u[row + i + 1] } else { c };
                let lap = w + e + u[up + i] + u[dn + i] - 4.0 * c;
                hr[i] += k * lap;
            }
        }
        self.t += dt;
        self.steps += 1;
        if self.steps % 64 == 0 && !self.h_field.iter().all(|v| v.is_finite()) {
            return Err(Error::Instability { t: self.t, reason: "non-finite enthalpy".into() });
        }
        temperature(&self.h_field, &mut self.u);
        Ok(())
    }

    /// Advances to `t_end`; the last step is shortened to land on it.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end - 1e-14 {
            let dt = self.dt.min(t_end - self.t);
            self.step_dt(dt)?;
        }
        Ok(())
    }

    /// Fails when melted material reaches the two outermost cell layers.
    pub fn check_clear_of_box(&self) -> Result<()> {
        let n = self.grid.n;
        for j in 0..n {
            for i in 0..n {
                let edge = i < 2 || j < 2 || i + 2 >= n || j + 2 >= n;
                if edge && self.h_field[self.grid.index(i, j)] > 0.0 {
                    return Err(Error::Instability {
                        t: self.t,
                        reason: format!("domain within two cells of the box edge at cell ({i}, {j})"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot { grid: self.grid, t: self.t, h_field: self.h_field.clone(), u: self.u.clone() }
    }
}

/// Immutable copy of the state at an output time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub t: f64,
    pub h_field: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub t: f64,
    pub bounds: [f64; 4],
    pub layout: String,
    pub fields: Vec<String>,
    pub config_hash: String,
}

impl Snapshot {
    pub fn header(&self, config_hash: &str) -> SnapshotHeader {
        SnapshotHeader {
            nx: self.grid.n,
            ny: self.grid.n,
            h: self.grid.h,
            t: self.t,
            bounds: BOX,
            layout: "row-major, y outer, little-endian f64".into(),
            fields: vec!["H".into(), "u".into()],
            config_hash: config_hash.into(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 * self.h_field.len());
        for v in self.h_field.iter().chain(&self.u) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_parts(header: &SnapshotHeader, bytes: &[u8]) -> Result<Self> {
        let grid = Grid::new(header.nx)?;
        let m = header.nx * header.ny;
        if bytes.len() != 16 * m {
            return Err(Error::Config(format!("snapshot payload has {} bytes, expected {}", bytes.len(), 16 * m)));
        }
        let vals: Vec<f64> =
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
        Ok(Snapshot { grid, t: header.t, h_field: vals[..m].to_vec(), u: vals[m..].to_vec() })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.index(i, j)]
    }
}

/// Steps to `t_final`, taking snapshots at the sorted `outputs` (and t = 0
/// when listed).
pub fn run(state: &mut EnthalpyState, t_final: f64, outputs: &[f64]) -> Result<Vec<Snapshot>> {
    if !(t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("final time {t_final} must be ≥ 0")));
    }
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.iter().any(|&t| t > t_final + 1e-12 || t < 0.0) {
        return Err(Error::InvalidParameter("output times must be sorted and within [0, T]".into()));
    }
    let mut out = Vec::new();
    if t_final == 0.0 {
        out.push(state.snapshot());
        return Ok(out);
    }
    for &t in outputs {
        state.advance_to(t)?;
        state.check_clear_of_box()?;
        out.push(state.snapshot());
    }
    state.advance_to(t_final)?;
    Ok(out)
}
