//! Planar melting benchmark against the Neumann similarity solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// λ with `√π·λ·e^{λ²}·erf(λ) = ste`.
pub fn neumann_lambda(ste: f64) -> Result<f64> {
    if !(ste > 0.0) {
        return Err(Error::InvalidParameter(format!("Stefan number must be positive, got {ste}")));
    }
    let f = |l: f64| std::f64::consts::PI.sqrt() * l * (l * l).exp() * libm::erf(l) - ste;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if f(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarResult {
    pub cells: usize,
    pub t: f64,
    pub lambda: f64,
    pub front: f64,
    pub exact: f64,
    pub relative_error: f64,
    /// Σ H change minus the wall inflow over the run.
    pub balance_defect: f64,
}

struct Slab {
    h: f64,
    hf: Vec<f64>,
    u: Vec<f64>,
    t: f64,
    inflow: f64,
}

impl Slab {
    fn new(cells: usize, length: f64) -> Self {
        Slab { h: length / cells as f64, hf: vec![0.0; cells], u: vec![0.0; cells], t: 0.0, inflow: 0.0 }
    }

    fn advance_to(&mut self, t_end: f64, ste: f64) {
        let n = self.hf.len();
        let h = self.h;
        let dt0 = super::DT_SAFETY * h * h / 2.0;
        while self.t < t_end - 1e-14 {
            let dt = dt0.min(t_end - self.t);
            for (u, &e) in self.u.iter_mut().zip(&self.hf) {
                *u = (e - 1.0_f64).max(0.0);
            }
            let k = dt / (h * h);
            let u = &self.u;
            let wall = 2.0 * ste - u[0];
            self.inflow += dt * 2.0 * (ste - u[0]) / h;
            for i in 0..n {
                let w = if i == 0 { wall } else { u[i - 1] };
                let e = if i + 1 < n { u[i + 1] } else { u[i] };
                self.hf[i] += k * (w - 2.0 * u[i] + e);
            }
            self.t += dt;
        }
    }

    fn front(&self) -> f64 {
        self.h * self.hf.iter().map(|v| v.clamp(0.0, 1.0)).sum::<f64>()
    }
}

fn check_args(cells: usize, t_final: f64, length: f64) -> Result<()> {
    if cells < 4 || !(t_final > 0.0) || !(length > 0.0) {
        return Err(Error::InvalidParameter("planar benchmark needs cells ≥ 4, T > 0, length > 0".into()));
    }
    Ok(())
}

/// Slab `[0, length]` initially solid at the melting point, wall held at
/// u = ste at x = 0, insulated at the far end. The front is `h·Σ min(H, 1)`.
pub fn planar_benchmark(cells: usize, t_final: f64, ste: f64, length: f64) -> Result<PlanarResult> {
    check_args(cells, t_final, length)?;
    let lambda = neumann_lambda(ste)?;
    let mut slab = Slab::new(cells, length);
    slab.advance_to(t_final, ste);
    let front = slab.front();
    if front >= length - 2.0 * slab.h {
        return Err(Error::Instability { t: slab.t, reason: "front reached the end of the slab".into() });
    }
    let exact = 2.0 * lambda * t_final.sqrt();
    let total = slab.h * slab.hf.iter().sum::<f64>();
    Ok(PlanarResult {
        cells,
        t: t_final,
        lambda,
        front,
        exact,
        relative_error: (front - exact).abs() / exact,
        balance_defect: total - slab.inflow,
    })
}

/// Front positions at the sorted `times` from one run.
pub fn planar_fronts(cells: usize, times: &[f64], ste: f64, length: f64) -> Result<Vec<f64>> {
    check_args(cells, times.last().copied().unwrap_or(0.0), length)?;
    let mut slab = Slab::new(cells, length);
    Ok(times
        .iter()
        .map(|&t| {
            slab.advance_to(t, ste);
            slab.front()
        })
        .collect())
}

/// Observed order from the summed front differences of three grids
/// `cells`, `2·cells`, `4·cells` over `times`.
pub fn self_convergence_order(cells: usize, times: &[f64], ste: f64, length: f64) -> Result<f64> {
    let f: Vec<Vec<f64>> =
        [cells, 2 * cells, 4 * cells].iter().map(|&n| planar_fronts(n, times, ste, length)).collect::<Result<_>>()?;
    let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    Ok((d(&f[0], &f[1]) / d(&f[1], &f[2])).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_solves_transcendental_equation() {
        let l = neumann_lambda(1.0).unwrap();
        let lhs = std::f64::consts::PI.sqrt() * l * (l * l).exp() * libm::erf(l);
        assert!((lhs - 1.0).abs() < 1e-12);
        // small-Ste limit λ ≈ √(ste/2)
        let s = neumann_lambda(1e-6).unwrap();
        assert!((s / (0.5e-6f64).sqrt() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn slab_conserves_enthalpy() {
        let r = planar_benchmark(64, 0.05, 1.0, 2.0).unwrap();
        assert!(r.balance_defect.abs() < 1e-12, "{}", r.balance_defect);
    }
}
