//! Run configuration: a TOML document validated before any work starts.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::solver::Grid;

pub const DEFAULT_GRID_H: f64 = 4.4 / 512.0;
pub const DEFAULT_OUTPUT_TIMES: [f64; 9] = [0.0, 0.025, 0.05, 0.075, 0.1, 0.15, 0.2, 0.25, 0.3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSetting {
    Value(f64),
    Keyword(String),
}

impl Default for DeltaSetting {
    fn default() -> Self {
        DeltaSetting::Keyword("auto".into())
    }
}

impl DeltaSetting {
    /// `None` for automatic selection.
    pub fn value(&self) -> Result<Option<f64>> {
        match self {
            DeltaSetting::Value(d) => Ok(Some(*d)),
            DeltaSetting::Keyword(k) if k == "auto" => Ok(None),
            DeltaSetting::Keyword(k) => Err(Error::Config(format!("delta must be \"auto\" or a number, got \"{k}\""))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatumKind {
    /// The nonconvex counterexample domain.
    Counterexample,
    /// u₀ = U on the disk alone.
    RadialControl,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "d_compat")]
    pub compat: f64,
    #[serde(default = "d_concavity")]
    pub concavity: f64,
    #[serde(default = "d_scan_offset")]
    pub scan_offset: f64,
    #[serde(default = "d_scan_step")]
    pub scan_step: f64,
}

fn d_compat() -> f64 {
    1e-8
}
fn d_concavity() -> f64 {
    crate::concavity::TOL_ANALYTIC
}
fn d_scan_offset() -> f64 {
    1e-4
}
fn d_scan_step() -> f64 {
    1.0 / 256.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { compat: d_compat(), concavity: d_concavity(), scan_offset: d_scan_offset(), scan_step: d_scan_step() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_n", rename = "N")]
    pub n: usize,
    #[serde(default = "d_q1")]
    pub q1: f64,
    #[serde(default)]
    pub delta: DeltaSetting,
    #[serde(default = "d_kind")]
    pub datum: DatumKind,
    /// Finest grid spacing; coarser grids double it.
    #[serde(default = "d_grid_h")]
    pub grid_h: f64,
    #[serde(default = "d_levels")]
    pub grid_levels: usize,
    #[serde(default = "d_t", rename = "T")]
    pub t_final: f64,
    #[serde(default = "d_times")]
    pub output_times: Vec<f64>,
    #[serde(default = "d_detection")]
    pub detection_range: [f64; 2],
    #[serde(default = "d_witness_time")]
    pub witness_time: f64,
    /// Recorded in the config and its hash; the built-in checks are deterministic.
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "d_out")]
    pub out_dir: String,
}

fn d_alpha() -> f64 {
    0.25
}
fn d_n() -> usize {
    2
}
fn d_q1() -> f64 {
    -1.0
}
fn d_kind() -> DatumKind {
    DatumKind::Counterexample
}
fn d_grid_h() -> f64 {
    DEFAULT_GRID_H
}
fn d_levels() -> usize {
    2
}
fn d_t() -> f64 {
    0.3
}
fn d_times() -> Vec<f64> {
    DEFAULT_OUTPUT_TIMES.to_vec()
}
fn d_detection() -> [f64; 2] {
    crate::diagnostics::DETECTION_RANGE
}
fn d_witness_time() -> f64 {
    0.2
}
fn d_seed() -> u64 {
    1
}
fn d_out() -> String {
    "run".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty document gives defaults")
    }
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must be in [0, 1/2), got {}", self.alpha)));
        }
        if self.n < 1 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if !(self.q1 < 0.0) {
            return Err(Error::Config(format!("q1 must be negative, got {}", self.q1)));
        }
        if let Some(d) = self.delta.value()? {
            if !(d > 0.0 && d < 0.25) {
                return Err(Error::Config(format!("delta must be in (0, 1/4), got {d}")));
            }
        }
        for g in self.grid_spacings() {
            Grid::with_spacing(g).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.grid_levels < 1 {
            return Err(Error::Config("grid_levels must be at least 1".into()));
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::Config(format!("T must be ≥ 0, got {}", self.t_final)));
        }
        if self.output_times.windows(2).any(|w| !(w[1] > w[0]))
            || self.output_times.iter().any(|&t| !(0.0..=self.t_final).contains(&t))
        {
            return Err(Error::Config("output_times must be increasing and within [0, T]".into()));
        }
        let [a, b] = self.detection_range;
        if !(a > 0.0 && b >= a) {
            return Err(Error::Config("detection_range must satisfy 0 < start ≤ end".into()));
        }
        let t = &self.tolerances;
        if !(t.compat > 0.0 && t.concavity > 0.0 && t.scan_offset >= 0.0 && t.scan_step > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.out_dir.is_empty() {
            return Err(Error::Config("out_dir must not be empty".into()));
        }
        Ok(())
    }

    /// Grid spacings from coarse to fine.
    pub fn grid_spacings(&self) -> Vec<f64> {
        (0..self.grid_levels).rev().map(|k| self.grid_h * (1u64 << k) as f64).collect()
    }

    /// SHA-256 of the canonical JSON form. The output directory is left out
    /// so that relocated runs keep their hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir.clear();
        let s = serde_json::to_string(&c).expect("config serializes");
        format!("{:x}", Sha256::digest(s.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c.alpha, 0.25);
        assert_eq!(c.n, 2);
        assert_eq!(c.delta.value().unwrap(), None);
        assert_eq!(c.grid_spacings(), vec![4.4 / 256.0, 4.4 / 512.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("alpah = 0.2").is_err());
        assert!(RunConfig::from_toml("[tolerances]\ncompt = 1.0").is_err());
    }

    #[test]
    fn alpha_range() {
        let e = RunConfig::from_toml("alpha = 0.6").unwrap_err().to_string();
        assert!(e.contains("alpha must be in [0, 1/2)"), "{e}");
    }

    #[test]
    fn delta_forms() {
        assert_eq!(RunConfig::from_toml("delta = 0.1").unwrap().delta.value().unwrap(), Some(0.1));
        assert!(RunConfig::from_toml("delta = \"big\"").is_err());
    }

    #[test]
    fn toml_round_trip_keeps_hash() {
        let c = RunConfig::from_toml("alpha = 0.4\nT = 0.2\noutput_times = [0.1, 0.2]").unwrap();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.hash(), back.hash());
        assert_ne!(c.hash(), RunConfig::default().hash());
    }
}
