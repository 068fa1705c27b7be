// The boundary-slope ODE: δ selection, margins and observed RK4 order.

use stefan_lab::psi::{choose_delta, convergence_order, solve_psi, PsiSolution, DEFAULT_STEP};
use stefan_lab::Result;

pub fn run_example() -> Result<PsiSolution> {
    let alpha = 0.25;
    let delta = choose_delta(alpha)?;
    let psi = solve_psi(alpha, delta, DEFAULT_STEP)?;
    let (m0, m2) = psi.margins();
    println!("delta = {delta}, min psi = {m0:.4}, min psi'' = {m2:.4}");
    for x in [-2.0 * delta, -delta, 0.0, delta, 2.0 * delta] {
        let (p, dp) = psi.eval(x)?;
        println!("x = {x:+.3}: psi = {p:.8}, psi' = {dp:+.8}");
    }
    println!("observed order {:.3}", convergence_order(alpha, 2.0 * delta, 50));
    Ok(psi)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
