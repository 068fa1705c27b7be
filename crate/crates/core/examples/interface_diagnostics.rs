// Interface fits on a synthetic trace that follows the short-time
// expansion w = 1/20 − tψ(x).

use stefan_lab::diagnostics::{fit_interface_quadratic, noise_floor, second_difference, short_time_deviation};
use stefan_lab::psi::{choose_delta, solve_psi, DEFAULT_STEP};
use stefan_lab::solver::interface::InterfaceTrace;
use stefan_lab::Result;

pub fn run_example() -> Result<[f64; 3]> {
    let alpha = 0.25;
    let delta = choose_delta(alpha)?;
    let psi = solve_psi(alpha, delta, DEFAULT_STEP)?;
    let (t, h) = (0.1, 4.4 / 512.0);
    let mut samples = Vec::new();
    let n = (4.0 * delta / h) as i64;
    for k in -n / 2..=n / 2 {
        let x = k as f64 * h;
        samples.push([x, 0.05 - t * psi.eval(x)?.0]);
    }
    let trace = InterfaceTrace { t, h, samples, polyline: vec![], reliable: true, issues: vec![] };
    let c = fit_interface_quadratic(&trace, [-delta, delta])?;
    println!("fit c0 = {:.6}, c1 = {:.2e}, c2 = {:.6}", c[0], c[1], c[2]);
    println!("second difference {:.6e}", second_difference(&trace, delta)?);
    println!("noise floor at h = {h:.5}: {:.4}", noise_floor(h, delta));
    println!("short-time deviation {:.2e}", short_time_deviation(&trace, &psi, [-delta / 2.0, delta / 2.0])?);
    Ok(c)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
