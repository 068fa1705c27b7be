mod compat_operators {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/compat_operators.rs"));
}

#[test]
fn compat_operators_runs() {
    compat_operators::run_example().expect("compat_operators example");
}

mod concavity_scan {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/concavity_scan.rs"));
}

#[test]
fn concavity_scan_runs() {
    concavity_scan::run_example().expect("concavity_scan example");
}

mod domain_geometry {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/domain_geometry.rs"));
}

#[test]
fn domain_geometry_runs() {
    domain_geometry::run_example().expect("domain_geometry example");
}

mod initial_datum {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/initial_datum.rs"));
}

#[test]
fn initial_datum_runs() {
    initial_datum::run_example().expect("initial_datum example");
}

mod interface_diagnostics {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/interface_diagnostics.rs"));
}

#[test]
fn interface_diagnostics_runs() {
    interface_diagnostics::run_example().expect("interface_diagnostics example");
}

mod pipeline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pipeline.rs"));
}

#[test]
fn pipeline_runs() {
    pipeline::run_example().expect("pipeline example");
}

mod planar_benchmark {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/planar_benchmark.rs"));
}

#[test]
fn planar_benchmark_runs() {
    planar_benchmark::run_example().expect("planar_benchmark example");
}

mod psi_ode {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/psi_ode.rs"));
}

#[test]
fn psi_ode_runs() {
    psi_ode::run_example().expect("psi_ode example");
}

mod radial_evolution {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/radial_evolution.rs"));
}

#[test]
fn radial_evolution_runs() {
    radial_evolution::run_example().expect("radial_evolution example");
}

mod radial_profile {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/radial_profile.rs"));
}

#[test]
fn radial_profile_runs() {
    radial_profile::run_example().expect("radial_profile example");
}
