//! Initial datum u₀ on Ω₀.

pub mod coeffs;
pub mod collar;
pub mod extension;
pub mod datum;
pub mod planar;
