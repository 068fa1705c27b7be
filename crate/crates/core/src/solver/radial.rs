//! Radial datum on the disk and the 1D front-fixing reference solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DISK_CENTER, DISK_RADIUS};
use crate::profile::ProfileBundle;

use super::InitialField;

/// `u₀ = U` on the disk D.
#[derive(Clone, Debug)]
pub struct RadialDatum {
    pub bundle: ProfileBundle,
}

impl RadialDatum {
    pub fn radius(p: [f64; 2]) -> f64 {
        (p[0] - DISK_CENTER[0]).hypot(p[1] - DISK_CENTER[1])
    }
}

impl InitialField for RadialDatum {
    fn contains(&self, p: [f64; 2]) -> bool {
        Self::radius(p) < DISK_RADIUS
    }

    fn value(&self, p: [f64; 2]) -> Result<f64> {
        Ok(self.bundle.u_value(p[0], p[1]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialReference {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    /// `(r, u)` at the final time.
    pub profile: Vec<[f64; 2]>,
}

impl RadialReference {
    /// R at t by linear interpolation between stored times.
    pub fn radius_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            return self.radii[0];
        }
        if k >= self.times.len() {
            return *self.radii.last().expect("nonempty trajectory");
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
        self.radii[k - 1] + w * (self.radii[k] - self.radii[k - 1])
    }
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut beta = b[0];
    d[0] /= beta;
    for i in 1..n {
        cp[i - 1] = c[i - 1] / beta;
        beta = b[i] - a[i] * cp[i - 1];
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// `u_t = u_rr + u_r/r` on `0 < r < R(t)`, `u(R) = 0`, `R' = −u_r(R)`, in
/// `ξ = r/R`: backward Euler in diffusion and advection, with R advanced
/// explicitly from the previous profile. Radii recorded every `record` steps.
pub fn radial_reference_with(bundle: &ProfileBundle, t_final: f64, m: usize, dt: f64) -> Result<RadialReference> {
    if !(t_final >= 0.0) || m < 8 || !(dt > 0.0) {
        return Err(Error::InvalidParameter("radial reference needs T ≥ 0, m ≥ 8, dt > 0".into()));
    }
    let dxi = 1.0 / m as f64;
    // unknowns u_0 … u_{m−1}; u_m = 0
    let mut u: Vec<f64> = (0..m).map(|i| bundle.u_value(0.0, DISK_CENTER[1] - 2.0 * i as f64 * dxi)).collect();
    let mut r = DISK_RADIUS;
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut radii = vec![r];
    let steps = (t_final / dt).ceil() as usize;
    let (mut a, mut b, mut c) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for s in 0..steps {
        let dt = dt.min(t_final - t);
        let ux1 = (-4.0 * u[m - 1] + u[m - 2]) / (2.0 * dxi);
        let rdot = -ux1 / r;
        let r_new = r + dt * rdot;
        if !(r_new > 0.0 && r_new < 2.0 * DISK_RADIUS) || !r_new.is_finite() {
            return Err(Error::Instability { t, reason: format!("front radius {r_new} out of range") });
        }
        let diff = dt / (r_new * r_new * dxi * dxi);
        let adv = dt * rdot / r_new / (2.0 * dxi);
        for i in 0..m {
            if i == 0 {
                a[0] = 0.0;
                b[0] = 1.0 + 4.0 * diff;
                c[0] = -4.0 * diff;
                continue;
            }
            let xi = i as f64 * dxi;
            let (lo, hi) = ((xi - 0.5 * dxi) / xi, (xi + 0.5 * dxi) / xi);
            a[i] = -diff * lo + adv * xi;
            b[i] = 1.0 + diff * (lo + hi);
            c[i] = -diff * hi - adv * xi;
        }
        thomas(&a, &b, &c, &mut u);
        r = r_new;
        t += dt;
        if (s + 1) % 10 == 0 || s + 1 == steps {
            times.push(t);
            radii.push(r);
        }
    }
    let mut profile: Vec<[f64; 2]> = u.iter().enumerate().map(|(i, &v)| [i as f64 * dxi * r, v]).collect();
    profile.push([r, 0.0]);
    Ok(RadialReference { times, radii, profile })
}

pub fn radial_reference(bundle: &ProfileBundle, t_final: f64) -> Result<RadialReference> {
    radial_reference_with(bundle, t_final, 800, 2e-5)
}
