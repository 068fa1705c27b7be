// α-concavity scans of the disk profile, with analytic and
// finite-difference jets.

use stefan_lab::concavity::{concavity_matrix, fd_jet, grid_points, scan, ConcavityReport, TOL_ANALYTIC};
use stefan_lab::profile::build_profile;
use stefan_lab::Result;

pub fn run_example() -> Result<ConcavityReport> {
    let b = build_profile(0.25, 2, -1.0)?;
    let inside = |p: [f64; 2]| p[0].hypot(p[1] - 2.0) < 2.0;
    let dist = |p: [f64; 2]| 2.0 - p[0].hypot(p[1] - 2.0);
    let pts = grid_points([-2.0, 2.0, 0.0, 4.0], 1.0 / 32.0, inside, dist, 1e-4);
    let rep = scan(|p| Ok(b.u_series(p[0], p[1], 2)?.to_jet()), &pts, 0.25, TOL_ANALYTIC, "disk, step 1/32")?;
    println!("{} points, worst eigenvalue {:.3e} at {:?}", rep.n_points, rep.worst_eigenvalue, rep.worst_location);

    let p = [0.3, 0.2];
    let exact = concavity_matrix(&b.u_series(p[0], p[1], 2)?.to_jet(), 0.25, p)?;
    let fd = concavity_matrix(&fd_jet(|q| Ok(b.u_value(q[0], q[1])), p, 1e-3)?, 0.25, p)?;
    println!("at {p:?}: analytic {:.6e}, finite difference {:.6e}", exact.max_eigenvalue(), fd.max_eigenvalue());
    Ok(rep)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
