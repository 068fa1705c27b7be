use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stefan_lab::config::RunConfig;
use stefan_lab::harness;
use stefan_lab::Error;

#[derive(Parser)]
#[command(name = "stefan-lab", about = "Counterexample data, enthalpy runs and convexity diagnostics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory (overrides out_dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Finest grid spacing
    #[arg(long, global = true)]
    grid: Option<f64>,
    /// Construction α; for `check`, the α to test against
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Comma-separated output times
    #[arg(long, global = true, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the initial datum and its construction report
    Construct,
    /// Concavity scan and compatibility residuals of the stored datum
    Check,
    /// Run the enthalpy solver on every grid level
    Evolve,
    /// Fit interfaces and search for the concavity witness
    Diagnose,
    /// Summarise the run directory as markdown
    Report,
}

enum Outcome {
    Pass,
    Fail(String),
}

fn load_config(cli: &Cli, base: Option<RunConfig>) -> Result<RunConfig, Error> {
    let mut cfg = match (&cli.config, base) {
        (Some(p), _) => RunConfig::from_file(p)?,
        (None, Some(b)) => b,
        (None, None) => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.display().to_string();
    }
    if let Some(h) = cli.grid {
        cfg.grid_h = h;
    }
    if let Some(t) = &cli.times {
        cfg.output_times = t.clone();
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> Result<PathBuf, Error> {
    if let Some(o) = &cli.out {
        return Ok(o.clone());
    }
    let cfg = load_config(cli, None)?;
    Ok(PathBuf::from(cfg.out_dir))
}

fn execute(cli: &Cli) -> Result<Outcome, Error> {
    let say = |s: String| {
        if !cli.quiet {
            println!("{s}");
        }
    };
    match cli.cmd {
        Cmd::Construct => {
            let mut cfg = load_config(cli, None)?;
            if let Some(a) = cli.alpha {
                cfg.alpha = a;
            }
            cfg.validate()?;
            let out = PathBuf::from(&cfg.out_dir);
            let r = harness::cmd_construct(&cfg, &out)?;
            for c in &r.compat {
                say(format!("compatibility k = {}: max residual {:.3e}", c.k, c.max_residual));
            }
            say(format!("datum written to {}", harness::datum_path(&out).display()));
            Ok(if r.pass { Outcome::Pass } else { Outcome::Fail("compatibility residuals above tolerance".into()) })
        }
        Cmd::Check => {
            let out = out_dir(cli)?;
            let r = harness::cmd_check(&out, cli.alpha)?;
            say(format!(
                "alpha {}: grid worst eigenvalue {:.3e} at {:?}",
                r.alpha_checked, r.grid.worst_eigenvalue, r.grid.worst_location
            ));
            if let Some(c) = &r.collar {
                say(format!("collar worst normalised eigenvalue {:.3e} at {:?}", c.worst_eigenvalue, c.worst_location));
            }
            for c in &r.compat {
                say(format!("compatibility k = {}: max residual {:.3e}", c.k, c.max_residual));
            }
            if r.pass {
                return Ok(Outcome::Pass);
            }
            let mut why = Vec::new();
            for s in std::iter::once(&r.grid).chain(r.collar.as_ref()) {
                if s.violated {
                    why.push(format!("concavity violated at {:?} ({})", s.worst_location, s.sampler));
                }
            }
            for c in r.compat.iter().filter(|c| !c.pass) {
                why.push(format!("compatibility k = {} residual {:.3e}", c.k, c.max_residual));
            }
            Ok(Outcome::Fail(why.join("; ")))
        }
        Cmd::Evolve => {
            let out = out_dir(cli)?;
            let (_, meta) = harness::load_datum(&out)?;
            let cfg = load_config(cli, Some(meta.config))?;
            let rf = harness::cmd_evolve(Path::new(&out), Some(&cfg))?;
            say(format!("grids {:?} written to {}", rf.grids, out.display()));
            Ok(Outcome::Pass)
        }
        Cmd::Diagnose => {
            let out = out_dir(cli)?;
            let r = harness::cmd_diagnose(&out)?;
            for g in &r.grids {
                let c2 = g.c2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                say(format!("h = {:.5}: largest c2 {:.3e}, noise floor {:.3e}", g.h, c2, g.noise_floor));
            }
            if r.confirmed() {
                Ok(Outcome::Pass)
            } else if !r.break_detected {
                Ok(Outcome::Fail("no break detected".into()))
            } else if r.alpha_witness.is_none() {
                Ok(Outcome::Fail("no alpha-violation witness".into()))
            } else {
                Ok(Outcome::Fail("witness moves between grids".into()))
            }
        }
        Cmd::Report => {
            let out = out_dir(cli)?;
            let s = harness::cmd_report(&out)?;
            say(s);
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(why)) => {
            eprintln!("{why}");
            ExitCode::from(1)
        }
        Err(e @ (Error::Config(_) | Error::InvalidParameter(_))) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e @ (Error::Diagnostic(_) | Error::UnreliableTrace(_))) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}
