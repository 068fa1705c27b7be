//! Pipeline orchestration and artifact persistence for the command line.
//!
//! Layout of a run directory:
//!
//! ```text
//! datum.json  construction.json  check.json  check_residuals.csv
//! run.json  grid_<n>/{snap_<k>.json, snap_<k>.bin, traces.json, traces.csv}
//! break_report.json  break_series.csv  interfaces_<n>.svg  report.md
//! ```
//!
//! Every JSON artifact has a `config_hash` field; CSV and SVG files carry it
//! in a leading comment.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compat::derive_compat_operator;
use crate::concavity::{grid_points, scan, scan_with, ConcavityReport};
use crate::config::{DatumKind, RunConfig};
use crate::diagnostics::{detect_convexity_break, interface_svg, BreakReport};
use crate::error::{Error, Result};
use crate::geometry::{DISK_CENTER, DISK_RADIUS};
use crate::initdata::datum::{DatumBundle, DatumParams, InitialDatum};
use crate::jet::DerivJet;
use crate::profile::{build_profile, ProfileBundle};
use crate::psi::{choose_delta, initial_slope, second_derivative, solve_psi, DEFAULT_STEP};
use crate::solver::interface::{extract_interface, InterfaceTrace};
use crate::solver::radial::RadialDatum;
use crate::solver::{init_enthalpy, run, Grid, InitialField, Snapshot, SnapshotHeader};

pub const BOUNDARY_SAMPLES: usize = 256;
/// Interface traces are taken below this height.
pub const TRACE_Y_MAX: f64 = 1.0;
/// The collar sampler uses offsets ε₀·2^-k for k below this.
const COLLAR_OFFSETS: i32 = 16;

/// Either the counterexample datum or the disk-only control.
#[derive(Clone, Debug)]
pub enum Datum {
    Counterexample(Box<InitialDatum>),
    RadialControl(RadialDatum),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatumFile {
    pub config_hash: String,
    pub config: RunConfig,
    /// δ used by the diagnostics windows.
    pub delta: f64,
    pub counterexample: Option<DatumBundle>,
    pub control: Option<ProfileBundle>,
}

impl Datum {
    pub fn build(cfg: &RunConfig) -> Result<(Self, f64)> {
        cfg.validate()?;
        let delta = match cfg.delta.value()? {
            Some(d) => d,
            None => choose_delta(cfg.alpha)?,
        };
        Ok(match cfg.datum {
            DatumKind::Counterexample => {
                let mut p = DatumParams::new(cfg.alpha);
                p.n = cfg.n;
                p.q1 = cfg.q1;
                p.delta = Some(delta);
                (Datum::Counterexample(Box::new(InitialDatum::build(&p)?)), delta)
            }
            DatumKind::RadialControl => {
                (Datum::RadialControl(RadialDatum { bundle: build_profile(cfg.alpha, cfg.n, cfg.q1)? }), delta)
            }
        })
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Datum::Counterexample(d) => d.alpha(),
            Datum::RadialControl(r) => r.bundle.alpha,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Datum::Counterexample(d) => d.n(),
            Datum::RadialControl(r) => r.bundle.n,
        }
    }

    pub fn field(&self) -> &dyn InitialField {
        match self {
            Datum::Counterexample(d) => d.as_ref(),
            Datum::RadialControl(r) => r,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.field().contains(p)
    }

    pub fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        match self {
            Datum::Counterexample(d) => d.domain().distance_to_boundary(p),
            Datum::RadialControl(_) => (DISK_RADIUS - RadialDatum::radius(p)).abs(),
        }
    }

    /// Lower bound on the distance to ∂Ω₀ from the circle and the bounding
    /// box of the bottom graph.
    pub fn distance_lower_bound(&self, p: [f64; 2]) -> f64 {
        let arc = (DISK_RADIUS - RadialDatum::radius(p)).abs();
        match self {
            Datum::Counterexample(d) => {
                let g = d.domain();
                let (lo, hi) = (g.g(0.0), g.g(-0.5).max(g.g(0.5)));
                let bx = (p[0].abs() - 0.5).max(0.0);
                let by = (p[1] - hi).max(lo - p[1]).max(0.0);
                arc.min(bx.hypot(by))
            }
            Datum::RadialControl(_) => arc,
        }
    }

    /// Analytic jet of u₀ at p.
    pub fn jet(&self, p: [f64; 2], depth: usize) -> Result<DerivJet> {
        match self {
            Datum::Counterexample(d) => d.u0_jet(p, depth),
            Datum::RadialControl(r) => Ok(r.bundle.u_series(p[0], p[1], depth)?.to_jet()),
        }
    }

    /// Points on ∂Ω₀: the domain's arclength samples, or equally spaced
    /// points on the circle for the control.
    pub fn boundary_points(&self, n: usize) -> Result<Vec<[f64; 2]>> {
        match self {
            Datum::Counterexample(d) => Ok(d.domain().boundary_samples(n)?.into_iter().map(|b| b.point).collect()),
            Datum::RadialControl(_) => Ok((0..n)
                .map(|k| {
                    let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    [DISK_CENTER[0] + DISK_RADIUS * phi.sin(), DISK_CENTER[1] - DISK_RADIUS * phi.cos()]
                })
                .collect()),
        }
    }

    pub fn to_file(&self, cfg: &RunConfig, delta: f64) -> DatumFile {
        let (counterexample, control) = match self {
            Datum::Counterexample(d) => (Some(d.to_bundle()), None),
            Datum::RadialControl(r) => (None, Some(r.bundle.clone())),
        };
        DatumFile { config_hash: cfg.hash(), config: cfg.clone(), delta, counterexample, control }
    }

    pub fn from_file(f: DatumFile) -> Result<Self> {
        match (f.counterexample, f.control) {
            (Some(b), None) => Ok(Datum::Counterexample(Box::new(InitialDatum::from_bundle(b)?))),
            (None, Some(p)) => Ok(Datum::RadialControl(RadialDatum { bundle: p })),
            _ => Err(Error::Config("datum file must hold exactly one of counterexample or control".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatRow {
    pub k: usize,
    pub samples: usize,
    pub max_residual: f64,
    pub worst_point: [f64; 2],
    pub tolerance: f64,
    pub pass: bool,
}

/// Residuals of the first N compatibility conditions at `samples`
/// boundary points.
pub fn compat_residuals(datum: &Datum, samples: usize, tol: f64) -> Result<Vec<CompatRow>> {
    let pts = datum.boundary_points(samples)?;
    let mut rows = Vec::new();
    for k in 1..=datum.n() {
        let op = derive_compat_operator(k)?;
        let mut worst = (0.0f64, pts[0]);
        for &p in &pts {
            let r = op.evaluate(&datum.jet(p, 2 * k)?)?.abs();
            if !(r <= worst.0) {
                worst = (r, p);
            }
        }
        rows.push(CompatRow {
            k,
            samples,
            max_residual: worst.0,
            worst_point: worst.1,
            tolerance: tol,
            pass: worst.0 < tol,
        });
    }
    Ok(rows)
}

/// Concavity scan on the uniform grid of step `step`, at least `offset`
/// inside ∂Ω₀.
pub fn grid_scan(datum: &Datum, alpha: f64, step: f64, offset: f64, tol: f64) -> Result<ConcavityReport> {
    let bbox = [-2.0, 2.0, -0.1, 4.0];
    // a cheap lower bound decides most points; the exact distance settles the rest
    let dist = |p: [f64; 2]| {
        let lb = datum.distance_lower_bound(p);
        if lb >= offset {
            lb
        } else {
            datum.distance_to_boundary(p)
        }
    };
    let pts = grid_points(bbox, step, |p| datum.contains(p), dist, offset);
    scan(|p| datum.jet(p, 2), &pts, alpha, tol, &format!("grid step {step}, offset {offset}"))
}

/// Scan of the retained collar `{g < y ≤ g + ε₀}`, which the grid sampler
/// misses when ε₀ is below its offset. Eigenvalues are normalised by v²
/// since v is of the size of the offset there.
pub fn collar_scan(datum: &InitialDatum, alpha: f64, step: f64, tol: f64) -> Result<ConcavityReport> {
    let nx = (2.0 / step).round() as usize;
    let mut pts = Vec::new();
    for i in 1..nx {
        let x = -1.0 + i as f64 * step;
        let g = datum.domain().g(x);
        for k in 0..COLLAR_OFFSETS {
            let p = [x, g + datum.eps0 * 0.5f64.powi(k)];
            if datum.retains(p) {
                pts.push(p);
            }
        }
    }
    scan_with(|p| datum.u0_jet(p, 2), &pts, alpha, tol, "retained collar", true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub config_hash: String,
    pub kind: DatumKind,
    pub alpha: f64,
    pub n: usize,
    pub delta: f64,
    pub compat: Vec<CompatRow>,
    pub psi_min: f64,
    pub psi2_min: f64,
    pub radial_collar_width: f64,
    pub collar_eps: Option<f64>,
    pub collar_a: Option<f64>,
    pub blend_left: Option<[f64; 2]>,
    pub blend_right: Option<[f64; 2]>,
    pub extension_eps: Option<f64>,
    pub pass: bool,
}

pub fn construction_report(datum: &Datum, cfg: &RunConfig, delta: f64) -> Result<ConstructionReport> {
    let compat = compat_residuals(datum, BOUNDARY_SAMPLES, cfg.tolerances.compat)?;
    let psi = solve_psi(datum.alpha(), delta, DEFAULT_STEP)?;
    let (psi_min, psi2_min) = psi.margins();
    let mut r = ConstructionReport {
        config_hash: cfg.hash(),
        kind: cfg.datum,
        alpha: datum.alpha(),
        n: datum.n(),
        delta,
        pass: compat.iter().all(|c| c.pass),
        compat,
        psi_min,
        psi2_min,
        radial_collar_width: 0.0,
        collar_eps: None,
        collar_a: None,
        blend_left: None,
        blend_right: None,
        extension_eps: None,
    };
    match datum {
        Datum::Counterexample(d) => {
            r.radial_collar_width = d.coeffs().bundle.collar_width;
            r.collar_eps = Some(d.eps0);
            r.collar_a = d.collar_scan.map(|s| s.fitted_a());
            r.blend_left = Some(d.coeffs().blend.left);
            r.blend_right = Some(d.coeffs().blend.right);
            r.extension_eps = Some(d.extension.eps);
        }
        Datum::RadialControl(c) => r.radial_collar_width = c.bundle.collar_width,
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub config_hash: String,
    pub alpha_built: f64,
    pub alpha_checked: f64,
    pub grid: ConcavityReport,
    pub collar: Option<ConcavityReport>,
    pub compat: Vec<CompatRow>,
    pub pass: bool,
}

pub fn check(datum: &Datum, cfg: &RunConfig, alpha: Option<f64>) -> Result<CheckReport> {
    let a = alpha.unwrap_or(datum.alpha());
    let t = &cfg.tolerances;
    let grid = grid_scan(datum, a, t.scan_step, t.scan_offset, t.concavity)?;
    let collar = match datum {
        Datum::Counterexample(d) => Some(collar_scan(d, a, t.scan_step, t.concavity)?),
        Datum::RadialControl(_) => None,
    };
    let compat = compat_residuals(datum, BOUNDARY_SAMPLES, t.compat)?;
    let pass = !grid.violated && collar.as_ref().is_none_or(|c| !c.violated) && compat.iter().all(|c| c.pass);
    Ok(CheckReport { config_hash: cfg.hash(), alpha_built: datum.alpha(), alpha_checked: a, grid, collar, compat, pass })
}

/// Snapshots and interface traces of one grid.
#[derive(Clone, Debug)]
pub struct GridRun {
    pub grid: Grid,
    pub snapshots: Vec<Snapshot>,
    pub traces: Vec<InterfaceTrace>,
}

pub fn trace_window(delta: f64) -> [f64; 2] {
    [-2.0 * delta, 2.0 * delta]
}

pub fn evolve_grid(field: &dyn InitialField, h: f64, t_final: f64, times: &[f64], delta: f64) -> Result<GridRun> {
    let grid = Grid::with_spacing(h)?;
    let mut state = init_enthalpy(field, grid)?;
    state.check_clear_of_box()?;
    let snapshots = run(&mut state, t_final, times)?;
    let traces = snapshots.iter().map(|s| extract_interface(s, trace_window(delta), TRACE_Y_MAX)).collect();
    Ok(GridRun { grid, snapshots, traces })
}

pub fn evolve(datum: &Datum, cfg: &RunConfig, delta: f64) -> Result<Vec<GridRun>> {
    cfg.grid_spacings()
        .into_iter()
        .map(|h| evolve_grid(datum.field(), h, cfg.t_final, &cfg.output_times, delta))
        .collect()
}

/// ψ''(0) of the datum's α.
pub fn psi2_at_origin(alpha: f64) -> f64 {
    second_derivative(alpha, 1.0, initial_slope(alpha))
}

/// The snapshot used for the α-violation search: the last one at or
/// before `witness_time`, else the last.
fn witness_index(times: &[f64], witness_time: f64) -> usize {
    times.iter().rposition(|&t| t > 0.0 && t <= witness_time + 1e-12).unwrap_or(times.len().saturating_sub(1))
}

pub fn diagnose_runs(runs: &[GridRun], cfg: &RunConfig, alpha: f64, delta: f64) -> Result<BreakReport> {
    let inputs: Vec<(Vec<InterfaceTrace>, Snapshot)> = runs
        .iter()
        .filter(|r| !r.snapshots.is_empty())
        .map(|r| {
            let times: Vec<f64> = r.snapshots.iter().map(|s| s.t).collect();
            (r.traces.clone(), r.snapshots[witness_index(&times, cfg.witness_time)].clone())
        })
        .collect();
    detect_convexity_break(&inputs, alpha, delta, cfg.detection_range, psi2_at_origin(alpha))
}

// ---- persistence ----

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&s)?)
}

fn stamp_csv(hash: &str, body: &str) -> String {
    format!("# config_hash={hash}\n{body}")
}

pub fn datum_path(out: &Path) -> PathBuf {
    out.join("datum.json")
}

/// Builds the datum and writes `datum.json` and `construction.json`.
pub fn cmd_construct(cfg: &RunConfig, out: &Path) -> Result<ConstructionReport> {
    let (datum, delta) = Datum::build(cfg)?;
    let report = construction_report(&datum, cfg, delta)?;
    write(&datum_path(out), serde_json::to_string(&datum.to_file(cfg, delta))?)?;
    write(&out.join("construction.json"), serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

pub fn load_datum(out: &Path) -> Result<(Datum, DatumFile)> {
    let f: DatumFile = read_json(&datum_path(out))?;
    if f.config_hash != f.config.hash() {
        return Err(Error::Config("datum.json: config_hash does not match its config".into()));
    }
    let meta = DatumFile { counterexample: None, control: None, ..f.clone() };
    Ok((Datum::from_file(f)?, meta))
}

pub fn cmd_check(out: &Path, alpha: Option<f64>) -> Result<CheckReport> {
    let (datum, meta) = load_datum(out)?;
    let rep = check(&datum, &meta.config, alpha)?;
    write(&out.join("check.json"), serde_json::to_string_pretty(&rep)?)?;
    let mut csv = String::from("k,samples,max_residual,x,y,pass\n");
    for r in &rep.compat {
        csv.push_str(&format!(
            "{},{},{:.6e},{:.9},{:.9},{}\n",
            r.k, r.samples, r.max_residual, r.worst_point[0], r.worst_point[1], r.pass
        ));
    }
    write(&out.join("check_residuals.csv"), stamp_csv(&rep.config_hash, &csv))?;
    Ok(rep)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunFile {
    pub config_hash: String,
    pub datum_hash: String,
    pub config: RunConfig,
    pub delta: f64,
    pub grids: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceFile {
    pub config_hash: String,
    pub traces: Vec<InterfaceTrace>,
}

fn grid_dir(out: &Path, n: usize) -> PathBuf {
    out.join(format!("grid_{n}"))
}

/// Evolves the stored datum with `cfg` (the datum's own config when `None`)
/// and persists snapshots and traces.
pub fn cmd_evolve(out: &Path, cfg: Option<&RunConfig>) -> Result<RunFile> {
    let (datum, meta) = load_datum(out)?;
    let cfg = cfg.cloned().unwrap_or(meta.config.clone());
    cfg.validate()?;
    if cfg.alpha != meta.config.alpha || cfg.datum != meta.config.datum {
        return Err(Error::Config("evolve config disagrees with the stored datum on alpha or datum kind".into()));
    }
    let hash = cfg.hash();
    let runs = evolve(&datum, &cfg, meta.delta)?;
    for r in &runs {
        let dir = grid_dir(out, r.grid.n);
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        for (k, s) in r.snapshots.iter().enumerate() {
            write(&dir.join(format!("snap_{k:03}.json")), serde_json::to_string_pretty(&s.header(&hash))?)?;
            write(&dir.join(format!("snap_{k:03}.bin")), s.to_bytes())?;
        }
        let tf = TraceFile { config_hash: hash.clone(), traces: r.traces.clone() };
        write(&dir.join("traces.json"), serde_json::to_string(&tf)?)?;
        let mut csv = String::from("t,x,w\n");
        for tr in &r.traces {
            for p in &tr.samples {
                csv.push_str(&format!("{:.6},{:.9},{:.12e}\n", tr.t, p[0], p[1]));
            }
        }
        write(&dir.join("traces.csv"), stamp_csv(&hash, &csv))?;
    }
    let rf = RunFile {
        config_hash: hash,
        datum_hash: meta.config_hash,
        config: cfg,
        delta: meta.delta,
        grids: runs.iter().map(|r| r.grid.n).collect(),
    };
    write(&out.join("run.json"), serde_json::to_string_pretty(&rf)?)?;
    Ok(rf)
}

fn load_snapshot(dir: &Path, k: usize, hash: &str) -> Result<Snapshot> {
    let header: SnapshotHeader = read_json(&dir.join(format!("snap_{k:03}.json")))?;
    if header.config_hash != hash {
        return Err(Error::Config(format!("mixed config hashes: snapshot {k} in {} has {}", dir.display(), header.config_hash)));
    }
    let bytes = fs::read(dir.join(format!("snap_{k:03}.bin")))?;
    Snapshot::from_parts(&header, &bytes)
}

/// Loads the persisted runs, refusing artifacts from different configs.
pub fn load_runs(out: &Path) -> Result<(RunFile, Vec<GridRun>)> {
    let (_, meta) = load_datum(out)?;
    let rf: RunFile = read_json(&out.join("run.json"))?;
    if rf.datum_hash != meta.config_hash {
        return Err(Error::Config("mixed config hashes: run.json was produced from a different datum".into()));
    }
    let mut runs = Vec::new();
    for &n in &rf.grids {
        let dir = grid_dir(out, n);
        let tf: TraceFile = read_json(&dir.join("traces.json"))?;
        if tf.config_hash != rf.config_hash {
            return Err(Error::Config(format!("mixed config hashes in {}", dir.display())));
        }
        let times: Vec<f64> = tf.traces.iter().map(|t| t.t).collect();
        if !times.iter().any(|&t| t > 0.0) {
            return Err(Error::Diagnostic("no positive-time snapshots".into()));
        }
        let k = witness_index(&times, rf.config.witness_time);
        let snap = load_snapshot(&dir, k, &rf.config_hash)?;
        // only the witness snapshot is loaded
        runs.push(GridRun { grid: Grid::new(n)?, snapshots: vec![snap], traces: tf.traces });
    }
    Ok((rf, runs))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StampedBreakReport {
    pub config_hash: String,
    #[serde(flatten)]
    pub report: BreakReport,
}

pub fn cmd_diagnose(out: &Path) -> Result<BreakReport> {
    let (rf, runs) = load_runs(out)?;
    let (datum, _) = load_datum(out)?;
    let alpha = datum.alpha();
    let inputs: Vec<(Vec<InterfaceTrace>, Snapshot)> =
        runs.iter().map(|r| (r.traces.clone(), r.snapshots[0].clone())).collect();
    let report =
        detect_convexity_break(&inputs, alpha, rf.delta, rf.config.detection_range, psi2_at_origin(alpha))?;
    let stamped = StampedBreakReport { config_hash: rf.config_hash.clone(), report: report.clone() };
    write(&out.join("break_report.json"), serde_json::to_string_pretty(&stamped)?)?;
    write(&out.join("break_series.csv"), stamp_csv(&rf.config_hash, &report.series_csv()))?;
    for r in &runs {
        let svg = interface_svg(&r.traces, [-rf.delta, rf.delta]);
        let svg = svg.replacen('\n', &format!("\n<!-- config_hash={} -->\n", rf.config_hash), 1);
        write(&out.join(format!("interfaces_{}.svg", r.grid.n)), svg)?;
    }
    Ok(report)
}

/// Markdown summary of whatever artifacts exist in the run directory.
pub fn cmd_report(out: &Path) -> Result<String> {
    let mut s = String::from("# Run report\n\n");
    let c: Option<ConstructionReport> = read_json(&out.join("construction.json")).ok();
    let k: Option<CheckReport> = read_json(&out.join("check.json")).ok();
    let b: Option<StampedBreakReport> = read_json(&out.join("break_report.json")).ok();
    if c.is_none() && k.is_none() && b.is_none() {
        return Err(Error::Config(format!("no artifacts in {}", out.display())));
    }
    if let Some(c) = &c {
        s.push_str(&format!("config hash `{}`\n\n## Construction\n\n", c.config_hash));
        s.push_str(&format!("- datum {:?}, alpha {}, N {}, delta {}\n", c.kind, c.alpha, c.n, c.delta));
        for r in &c.compat {
            s.push_str(&format!("- compatibility k = {}: max residual {:.3e} ({})\n", r.k, r.max_residual, verdict(r.pass)));
        }
        s.push_str(&format!("- min psi {:.4}, min psi'' {:.4}\n", c.psi_min, c.psi2_min));
        if let (Some(e), Some(a)) = (c.collar_eps, c.collar_a) {
            s.push_str(&format!("- collar width {e:.3e}, fitted a {a:.3e}\n"));
        }
        s.push('\n');
    }
    if let Some(k) = &k {
        s.push_str("## Check\n\n");
        s.push_str(&format!(
            "- alpha checked {} (built {}): grid worst eigenvalue {:.3e} at {:?}\n",
            k.alpha_checked, k.alpha_built, k.grid.worst_eigenvalue, k.grid.worst_location
        ));
        if let Some(col) = &k.collar {
            s.push_str(&format!("- collar worst eigenvalue {:.3e} at {:?}\n", col.worst_eigenvalue, col.worst_location));
        }
        s.push_str(&format!("- overall: {}\n\n", verdict(k.pass)));
    }
    if let Some(b) = &b {
        let r = &b.report;
        s.push_str("## Diagnosis\n\n| h | t | c2 | noise floor | second diff |\n|---|---|---|---|---|\n");
        for g in &r.grids {
            for i in 0..g.times.len() {
                s.push_str(&format!(
                    "| {:.5} | {:.3} | {:.4e} | {:.4e} | {:.4e} |\n",
                    g.h, g.times[i], g.c2[i], g.noise_floor, g.second_diffs[i]
                ));
            }
        }
        s.push_str(&format!(
            "\n- convexity break: {}\n- magnitude check: {}\n- alpha witness: {}\n",
            if r.break_detected { "detected" } else { "not detected" },
            verdict(r.magnitude_ok),
            match &r.alpha_witness {
                Some(w) => format!("eigenvalue {:.3e} at {:?}, level {:.3e}", w.eigenvalue, w.point, w.eps_level),
                None => "none".into(),
            }
        ));
        for n in &r.notes {
            s.push_str(&format!("- {n}\n"));
        }
    }
    write(&out.join("report.md"), &s)?;
    Ok(s)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_snapshot_choice() {
        let t = [0.0, 0.1, 0.2, 0.3];
        assert_eq!(witness_index(&t, 0.2), 2);
        assert_eq!(witness_index(&t, 0.25), 2);
        assert_eq!(witness_index(&[0.0, 0.3], 0.2), 1);
    }

    #[test]
    fn control_satisfies_compatibility() {
        let mut cfg = RunConfig::default();
        cfg.datum = DatumKind::RadialControl;
        let (d, _) = Datum::build(&cfg).unwrap();
        let rows = compat_residuals(&d, 64, 1e-8).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    }

    #[test]
    fn lower_bound_never_exceeds_distance() {
        let mut cfg = RunConfig::default();
        cfg.datum = DatumKind::RadialControl;
        let (d, _) = Datum::build(&cfg).unwrap();
        for p in [[0.0, 0.5], [1.0, 2.0], [-0.3, 3.9]] {
            assert!(d.distance_lower_bound(p) <= d.distance_to_boundary(p) + 1e-15);
        }
    }

    #[test]
    fn psi_curvature_at_origin() {
        // ψ'(0)² = 2/(1 − 2α) makes ψ''(0) = 1/3 for every α
        for a in [0.0, 0.25, 0.45] {
            assert!((psi2_at_origin(a) - 1.0 / 3.0).abs() < 1e-14);
        }
    }
}
