// construct → check → evolve → diagnose → report on the disk control,
// with a short horizon on 256² and 512² grids.

use stefan_lab::config::RunConfig;
use stefan_lab::harness::{cmd_check, cmd_construct, cmd_diagnose, cmd_evolve, cmd_report};
use stefan_lab::Result;

pub fn run_example() -> Result<bool> {
    let out = std::env::temp_dir().join("stefan-lab-example-pipeline");
    let cfg = RunConfig::from_toml(
        "datum = \"radial_control\"\nT = 0.1\noutput_times = [0.0, 0.05, 0.075, 0.1]\nwitness_time = 0.1\ndetection_range = [0.05, 0.1]",
    )?;
    cmd_construct(&cfg, &out)?;
    let check = cmd_check(&out, None)?;
    println!("check passes: {}", check.pass);
    cmd_evolve(&out, None)?;
    let report = cmd_diagnose(&out)?;
    println!("break detected: {}, witness: {}", report.break_detected, report.alpha_witness.is_some());
    print!("{}", cmd_report(&out)?);
    Ok(report.confirmed())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
