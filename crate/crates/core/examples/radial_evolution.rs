// The disk-only datum on the 2D grid against the 1D front-fixing solver.

use stefan_lab::profile::build_profile;
use stefan_lab::solver::radial::{radial_reference, RadialDatum};
use stefan_lab::solver::{init_enthalpy, run, Grid};
use stefan_lab::Result;

pub fn run_example() -> Result<f64> {
    let datum = RadialDatum { bundle: build_profile(0.25, 2, -1.0)? };
    let reference = radial_reference(&datum.bundle, 0.1)?;
    let mut state = init_enthalpy(&datum, Grid::new(256)?)?;
    let e0 = state.total_enthalpy();
    let snaps = run(&mut state, 0.1, &[0.05, 0.1])?;
    let mut worst: f64 = 0.0;
    for s in &snaps {
        // radius of the disk with the melted area
        let area: f64 = s.h_field.iter().map(|v| v.clamp(0.0, 1.0)).sum::<f64>() * s.grid.h * s.grid.h;
        let r = (area / std::f64::consts::PI).sqrt();
        let r_ref = reference.radius_at(s.t);
        println!("t = {:.2}: area radius {r:.6}, reference {r_ref:.6}", s.t);
        worst = worst.max((r - r_ref).abs());
    }
    println!("enthalpy change {:.2e} over {} steps", state.total_enthalpy() - e0, state.steps);
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
