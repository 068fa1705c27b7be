// One-dimensional melting against the Neumann similarity solution.

use stefan_lab::solver::planar::{planar_benchmark, self_convergence_order, PlanarResult};
use stefan_lab::Result;

pub fn run_example() -> Result<PlanarResult> {
    let mut last = None;
    for cells in [64, 128, 256] {
        let r = planar_benchmark(cells, 0.5, 1.0, 2.0)?;
        println!(
            "{cells:4} cells: front {:.6}, exact {:.6}, relative error {:.2e}, balance {:.1e}",
            r.front, r.exact, r.relative_error, r.balance_defect
        );
        last = Some(r);
    }
    let times: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
    println!("self-convergence order {:.3}", self_convergence_order(64, &times, 1.0, 2.0)?);
    Ok(last.expect("three runs"))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
