// Derives the first two compatibility operators and evaluates them on the
// radial profile's boundary jet.

use stefan_lab::compat::derive_compat_operator;
use stefan_lab::profile::build_profile;
use stefan_lab::Result;

pub fn run_example() -> Result<Vec<f64>> {
    let profile = build_profile(0.25, 2, -1.0)?;
    let mut residuals = Vec::new();
    for k in 1..=2 {
        let op = derive_compat_operator(k)?;
        println!("P_{k}: {} terms, order {}", op.terms.len(), op.max_order());
        if k == 1 {
            print!("{}", op.to_text());
        }
        // bottom of the disk, where r = 2
        let jet = profile.u_series(0.0, 0.0, 2 * k)?.to_jet();
        let r = op.evaluate(&jet)?;
        println!("residual at (0, 0): {r:.3e}");
        residuals.push(r);
    }
    Ok(residuals)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
