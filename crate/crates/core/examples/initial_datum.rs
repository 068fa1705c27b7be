// Builds the counterexample datum and samples it near the flat segment.

use stefan_lab::initdata::datum::{DatumParams, InitialDatum};
use stefan_lab::Result;

pub fn run_example() -> Result<InitialDatum> {
    let d = InitialDatum::build(&DatumParams::new(0.25))?;
    println!("delta {}, collar width {:.3e}, extension eps {:.3e}", d.delta(), d.eps0, d.extension.eps);
    if let Some(s) = d.collar_scan {
        println!("collar constant a = {:.4e} over {} points", s.fitted_a(), s.points);
    }
    let y0 = d.domain().g(0.0);
    for dy in [1e-7, 1e-6, 1e-5, 1e-3, 0.5] {
        let p = [0.0, y0 + dy];
        println!("u0(0, g + {dy:.0e}) = {:.6e}, retained: {}", d.u0_value(p)?, d.retains(p));
    }
    Ok(d)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
