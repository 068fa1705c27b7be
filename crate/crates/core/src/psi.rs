//! The coefficient ODE `ψψ'' − (2/3)(1−2α)ψ'² = −1`, `ψ(0) = 1`,
//! `ψ'(0) = √(2/(1−2α))`, and the choice of the half-width δ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;

pub const DEFAULT_STEP: f64 = 1e-4;
pub const MARGIN_PSI: f64 = 0.1;
pub const MARGIN_PSI2: f64 = 0.05;

fn b_coeff(alpha: f64) -> f64 {
    2.0 / 3.0 * (1.0 - 2.0 * alpha)
}

pub fn initial_slope(alpha: f64) -> f64 {
    (2.0 / (1.0 - 2.0 * alpha)).sqrt()
}

/// ψ'' expressed through the ODE.
pub fn second_derivative(alpha: f64, psi: f64, dpsi: f64) -> f64 {
    (-1.0 + b_coeff(alpha) * dpsi * dpsi) / psi
}

fn rk4_step(alpha: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let f = |y: [f64; 2]| [y[1], second_derivative(alpha, y[0], y[1])];
    let k1 = f(y);
    let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrates from 0 to `x_end` with `n` equal RK4 steps.
pub fn integrate(alpha: f64, x_end: f64, n: usize) -> [f64; 2] {
    let h = x_end / n as f64;
    let mut y = [1.0, initial_slope(alpha)];
    for _ in 0..n {
        y = rk4_step(alpha, y, h);
    }
    y
}

/// Observed order from three step sizes `h`, `h/2`, `h/4` on `[0, x_end]`.
pub fn convergence_order(alpha: f64, x_end: f64, n_coarse: usize) -> f64 {
    let a = integrate(alpha, x_end, n_coarse)[0];
    let b = integrate(alpha, x_end, 2 * n_coarse)[0];
    let c = integrate(alpha, x_end, 4 * n_coarse)[0];
    ((a - b) / (b - c)).abs().log2()
}

/// Taylor coefficients of ψ about a point where `(ψ, ψ')` are known.
pub fn ode_taylor(alpha: f64, psi: f64, dpsi: f64, degree: usize) -> Vec<f64> {
    let b = b_coeff(alpha);
    let mut c = vec![0.0; degree.max(1) + 1];
    c[0] = psi;
    c[1] = dpsi;
    for k in 0..degree.saturating_sub(1) {
        let mut rhs = if k == 0 { -1.0 } else { 0.0 };
        for i in 0..=k {
            rhs += b * ((i + 1) as f64) * c[i + 1] * ((k - i + 1) as f64) * c[k - i + 1];
        }
        for i in 1..=k {
            rhs -= c[i] * ((k - i + 2) * (k - i + 1)) as f64 * c[k - i + 2];
        }
        c[k + 2] = rhs / (c[0] * ((k + 2) * (k + 1)) as f64);
    }
    c.truncate(degree + 1);
    c
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiSolution {
    pub alpha: f64,
    pub delta: f64,
    pub step: f64,
    /// Index of x = 0 in `samples`.
    pub origin: usize,
    /// `(ψ, ψ')` at `x_i = (i − origin)·step`.
    pub samples: Vec<[f64; 2]>,
}

fn sample_range(alpha: f64, step: f64, x_lo: f64, x_hi: f64, floor: f64) -> (usize, Vec<[f64; 2]>) {
    let n_hi = (x_hi / step).round() as usize;
    let n_lo = (-x_lo / step).round() as usize;
    let y0 = [1.0, initial_slope(alpha)];
    let run = |n: usize, h: f64| {
        let mut out = vec![y0];
        let mut y = y0;
        for _ in 0..n {
            y = rk4_step(alpha, y, h);
            if !(y[0] > floor) || !y[0].is_finite() || !y[1].is_finite() {
                break;
            }
            out.push(y);
        }
        out
    };
    let right = run(n_hi, step);
    let left = run(n_lo, -step);
    let origin = left.len() - 1;
    let mut samples: Vec<[f64; 2]> = left.into_iter().rev().collect();
    samples.extend_from_slice(&right[1..]);
    (origin, samples)
}

pub fn solve_psi(alpha: f64, delta: f64, step: f64) -> Result<PsiSolution> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must be in [0, 1/2), got {alpha}")));
    }
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::InvalidParameter(format!("delta must be in (0, 1/4), got {delta}")));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let n = (2.0 * delta / step).round().max(1.0);
    let step = 2.0 * delta / n;
    let (origin, samples) = sample_range(alpha, step, -2.0 * delta, 2.0 * delta, 0.0);
    let sol = PsiSolution { alpha, delta, step, origin, samples };
    let expected = 2 * n as usize + 1;
    if sol.samples.len() != expected {
        let x = if sol.origin < n as usize { sol.x_min() - step } else { sol.x_max() + step };
        return Err(Error::Invariant(format!("ψ reaches 0 near x = {x:.6}")));
    }
    for (i, s) in sol.samples.iter().enumerate() {
        let d2 = second_derivative(alpha, s[0], s[1]);
        if !(s[0] > 0.0 && d2 > 0.0) {
            return Err(Error::Invariant(format!(
                "ψ = {:.3e}, ψ'' = {:.3e} at x = {:.6}",
                s[0],
                d2,
                sol.x_at(i)
            )));
        }
    }
    Ok(sol)
}

/// Largest δ in {0.24, 0.22, …, 0.02} with ψ ≥ 0.1 and ψ'' ≥ 0.05 on [−2δ, 2δ].
pub fn choose_delta(alpha: f64) -> Result<f64> {
    for k in (1..=12).rev() {
        let delta = 0.02 * k as f64;
        if let Ok(sol) = solve_psi(alpha, delta, DEFAULT_STEP) {
            let (m0, m2) = sol.margins();
            if m0 >= MARGIN_PSI && m2 >= MARGIN_PSI2 {
                return Ok(delta);
            }
        }
    }
    Err(Error::Construction(format!("no δ in the search grid works for alpha = {alpha}")))
}

impl PsiSolution {
    pub fn x_at(&self, i: usize) -> f64 {
        (i as f64 - self.origin as f64) * self.step
    }

    pub fn x_min(&self) -> f64 {
        self.x_at(0)
    }

    pub fn x_max(&self) -> f64 {
        self.x_at(self.samples.len() - 1)
    }

    /// Smallest ψ and ψ'' over the samples on [−2δ, 2δ].
    pub fn margins(&self) -> (f64, f64) {
        let lim = 2.0 * self.delta + 0.5 * self.step;
        let mut m0 = f64::INFINITY;
        let mut m2 = f64::INFINITY;
        for (i, s) in self.samples.iter().enumerate() {
            if self.x_at(i).abs() <= lim {
                m0 = m0.min(s[0]);
                m2 = m2.min(second_derivative(self.alpha, s[0], s[1]));
            }
        }
        (m0, m2)
    }

    /// Same integration continued to `[x_lo, x_hi]`, stopping where ψ drops to `floor`.
    pub fn extended(&self, x_lo: f64, x_hi: f64, floor: f64) -> PsiSolution {
        let (origin, samples) = sample_range(self.alpha, self.step, x_lo, x_hi, floor);
        PsiSolution { origin, samples, ..self.clone() }
    }

    fn nearest(&self, x: f64) -> Result<usize> {
        let i = (x / self.step).round() + self.origin as f64;
        if i < 0.0 || i > (self.samples.len() - 1) as f64 {
            return Err(Error::InvalidParameter(format!(
                "x = {x} outside the ψ sample range [{}, {}]",
                self.x_min(),
                self.x_max()
            )));
        }
        Ok(i as usize)
    }

    /// Taylor coefficients of ψ about `x`.
    pub fn taylor(&self, x: f64, degree: usize) -> Result<Series> {
        let i = self.nearest(x)?;
        let s = self.samples[i];
        let node = Series::from_coeffs(ode_taylor(self.alpha, s[0], s[1], 30));
        let dx = x - self.x_at(i);
        let (p, dp) = (node.eval_derivative(dx, 0), node.eval_derivative(dx, 1));
        Ok(Series::from_coeffs(ode_taylor(self.alpha, p, dp, degree)))
    }

    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let t = self.taylor(x, 1)?;
        Ok((t.coeff(0, 0), t.coeff(1, 0)))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,psi,dpsi\n");
        for (i, v) in self.samples.iter().enumerate() {
            s.push_str(&format!("{:.10},{:.16e},{:.16e}\n", self.x_at(i), v[0], v[1]));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_data() {
        let sol = solve_psi(0.0, 0.1, DEFAULT_STEP).unwrap();
        let s = sol.samples[sol.origin];
        assert_eq!(s[0], 1.0);
        assert!((s[1] - 2f64.sqrt()).abs() < 1e-15);
        for a in [0.0, 0.2, 0.45] {
            assert!((second_derivative(a, 1.0, initial_slope(a)) - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ode_taylor_satisfies_ode() {
        let c = Series::from_coeffs(ode_taylor(0.25, 0.8, 1.7, 10));
        for &dx in &[0.0, 0.01, -0.02] {
            let (p, d1, d2) = (c.eval_derivative(dx, 0), c.eval_derivative(dx, 1), c.eval_derivative(dx, 2));
            let r = p * d2 - b_coeff(0.25) * d1 * d1 + 1.0;
            assert!(r.abs() < 1e-9, "residual {r}");
        }
    }

    #[test]
    fn taylor_between_nodes_matches_rk4() {
        let sol = solve_psi(0.25, 0.1, DEFAULT_STEP).unwrap();
        let x = 0.123456;
        let (p, _) = sol.eval(x).unwrap();
        let y = integrate(0.25, x, 20000);
        assert!((p - y[0]).abs() < 1e-12);
    }
}
