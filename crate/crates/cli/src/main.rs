//! Batch front end: `check`, `reference`, `evaluate`, `minimize`.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical
//! failure, 4 failed invariant.

use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sben::config::{RunConfig, StartKind};
use sben::gravitation::Gravitation;
use sben::io::{check_archive_grid, read_path_archive, write_json, write_path_archive};
use sben::oracle::perturb_path;
use sben::sben::{assemble_pi, minimize, recover_pressures, Path, SbenReport, StopReason};
use sben::suite::{all_pass, run_suite};
use sben::Error;

#[derive(Parser)]
#[command(name = "sben", version, about = "Space-time minimum principle for viscous flow on periodic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite and print a pass/fail table.
    Check(Common),
    /// Write the oracle trajectory of the configured case as a path archive.
    Reference(Common),
    /// Evaluate the functional on a path archive.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Path archive directory.
        archive: PathBuf,
    },
    /// Minimize the functional, optionally from a warm-start archive.
    Minimize {
        #[command(flatten)]
        common: Common,
        /// Warm-start archive directory.
        archive: Option<PathBuf>,
    },
}

enum Failure {
    Error(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::Archive(_)
        | Error::GridMismatch { .. }
        | Error::InvalidGrid(_)
        | Error::InvalidParameter(_)
        | Error::UnknownPreset(_)
        | Error::Unsupported(_)
        | Error::MissingPressure
        | Error::Io(_) => 2,
        _ => 3,
    }
}

fn load_config(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(file) => RunConfig::load(file)?,
        None => RunConfig::default_check(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn print_report(report: &SbenReport) {
    println!("kind            {}", report.kind);
    println!("Pi              {:.6e}", report.total);
    println!("phi scale       {:.6e}", report.phi_scale);
    println!("max NS residual {:.6e}", report.max_ns_residual());
    println!();
    println!("{:>10} {:>14} {:>14} {:>14} {:>14}", "t_mid", "phi", "phi*", "pairing", "gap");
    for t in &report.intervals {
        println!(
            "{:>10.4} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            t.t_mid, t.phi, t.phi_star, t.pairing, t.gap
        );
    }
    if !report.pi_history.is_empty() {
        println!();
        println!("{:>6} {:>14} {:>14}", "iter", "Pi", "|grad|");
        let n = report.pi_history.len();
        let stride = (n / 20).max(1);
        for (i, (p, g)) in report.pi_history.iter().zip(&report.grad_norm_history).enumerate() {
            if i % stride == 0 || i + 1 == n {
                println!("{i:>6} {p:>14.6e} {g:>14.6e}");
            }
        }
    }
}

fn cmd_check(common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let checks = run_suite(&cfg)?;
    println!("{:<36} {:>13} {:>13}  result", "check", "value", "limit");
    for c in &checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{:<36} {:>13.4e} {:>13.4e}  {verdict}", c.name, c.value, c.limit);
    }
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        write_json(&dir.join("check.json"), &checks)?;
    }
    if all_pass(&checks) {
        Ok(())
    } else {
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        Err(Failure::Invariant(failed.join(", ")))
    }
}

fn with_pressures(path: Path, cfg: &RunConfig, grav: &Gravitation) -> Result<Path, Error> {
    if path.is_incompressible() {
        let ps = recover_pressures(&path, cfg.mu, grav, &cfg.conjugate)?;
        return path.with_pressures(ps);
    }
    Ok(path)
}

fn cmd_reference(common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let dir = out_dir(common, "reference");
    let spec = cfg.case_spec()?;
    let path = with_pressures(spec.reference_path()?, &cfg, &spec.grav)?;
    write_path_archive(&dir, &path)?;
    println!(
        "wrote {} slices of {} on {:?} to {}",
        path.states.len(),
        cfg.case.id(),
        cfg.grid.shape(),
        dir.display()
    );
    Ok(())
}

fn cmd_evaluate(common: &Common, archive: &FsPath) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let path = read_path_archive(archive)?;
    check_archive_grid(&path, &cfg.grid)?;
    let spec = cfg.case_spec()?;
    let report = assemble_pi(&path, cfg.mu, &spec.grav, &cfg.conjugate)?;
    print_report(&report);

    // Ten times the value on the oracle trajectory at the same resolution.
    let mut ref_spec = spec;
    ref_spec.horizon.n = path.n_intervals();
    ref_spec.horizon.t_end = path.dt() * path.n_intervals() as f64;
    let eps = 10.0 * assemble_pi(&ref_spec.reference_path()?, cfg.mu, &spec.grav, &cfg.conjugate)?.total;
    println!();
    println!("eps_disc        {eps:.6e}");
    println!("within eps_disc {}", if report.total <= eps { "yes" } else { "no" });
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(())
}

fn cmd_minimize(common: &Common, archive: Option<&FsPath>) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let spec = cfg.case_spec()?;
    let start = match archive {
        Some(dir) => {
            let p = read_path_archive(dir)?;
            check_archive_grid(&p, &cfg.grid)?;
            p
        }
        None => match cfg.start.kind {
            StartKind::Frozen => spec.frozen_path()?,
            StartKind::PerturbedReference => {
                perturb_path(&spec.reference_path()?, cfg.start.noise, cfg.seed, cfg.start.kmax)?
            }
        },
    };
    let result = minimize(&start, cfg.mu, &spec.grav, &cfg.conjugate, &cfg.minimizer)?;
    let dir = out_dir(common, "minimized");
    write_path_archive(&dir, &result.path)?;
    write_json(&dir.join("report.json"), &result.report)?;
    print_report(&result.report);
    let first = result.report.pi_history.first().copied().unwrap_or(f64::NAN);
    println!();
    println!("stop            {:?}", result.stop);
    println!("iterations      {}", result.report.iterations);
    println!("Pi reduction    {:.3e}x", first / result.report.total);
    println!("wrote {}", dir.display());
    if result.stop == StopReason::LineSearchFailure {
        return Err(Error::LineSearch {
            iterations: result.report.iterations,
            value: result.report.total,
        }
        .into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check(c) => cmd_check(c),
        Command::Reference(c) => cmd_reference(c),
        Command::Evaluate { common, archive } => cmd_evaluate(common, archive),
        Command::Minimize { common, archive } => cmd_minimize(common, archive.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Invariant(names)) => {
            eprintln!("failed invariants: {names}");
            ExitCode::from(4)
        }
    }
}
