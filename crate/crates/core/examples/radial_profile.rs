// Boundary Taylor data of the radial profile and its concave collar.

use stefan_lab::profile::{build_profile, ProfileBundle};
use stefan_lab::Result;

pub fn run_example() -> Result<ProfileBundle> {
    let b = build_profile(0.25, 2, -1.0)?;
    for (k, c) in b.boundary_coeffs.iter().enumerate() {
        println!("q^({k})(2) = {c:.6}");
    }
    println!("collar width {}, c_lower {:.4}", b.collar_width, b.c_lower);
    println!("plateau value q(0.5) = {:.6e}", b.eval_q(0.5, 0)?);
    for r in [1.6, 1.8, 1.9, 1.99] {
        println!("r = {r}: q = {:.6e}, radially concave: {}", b.eval_q(r, 0)?, b.check_radial_concavity(r, 0.25)?);
    }
    Ok(b)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
