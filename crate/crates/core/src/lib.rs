pub mod compat;
pub mod concavity;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod jet;
pub mod quadrature;
pub mod psi;
pub mod geometry;
pub mod harness;
pub mod initdata;
pub mod profile;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
