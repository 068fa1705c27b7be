// The initial domain: flat bottom, convex blends and the circle.

use stefan_lab::geometry::{build_g, DomainSpec};
use stefan_lab::Result;

pub fn run_example() -> Result<DomainSpec> {
    let d = build_g(0.1)?;
    for x in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75] {
        println!("g({x}) = {:.9}, g'' = {:.5}", d.g(x), d.g_derivative(x, 2));
    }
    let s = d.boundary_samples(16)?;
    println!("perimeter about {:.5}", s.last().map_or(0.0, |b| b.arc) * 16.0 / 15.0);
    println!("distance from (0, 1) to the boundary {:.6}", d.distance_to_boundary([0.0, 1.0]));
    Ok(d)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
