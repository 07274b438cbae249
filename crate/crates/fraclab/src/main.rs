//! Command-line entry point.
//!
//! `fraclab <command> --config <path> [--out <path>] [--workers K] [--seed S]`
//!
//! Exit codes: 0 success, 2 invalid configuration or mathematically
//! inadmissible parameters, 3 torsion solver failure, 4 a certified
//! (below-threshold) experiment point failed, 5 a verification property
//! failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fraclab::cli::{self, RunConfig};
use fraclab::error::Error;

#[derive(Parser)]
#[command(name = "fraclab", version, about = "Numerical laboratory for the Dirichlet fractional Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to a key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output path for tables / reports (in addition to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
    /// RNG seed for randomized probes.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every closed-form constant and threshold.
    Constants(Common),
    /// Validate the discrete operator against the exact torsion solution.
    TorsionCheck(Common),
    /// Run the two-solution experiment at a single parameter value.
    Solve(Common),
    /// Run the experiment over a parameter range, one CSV row per point.
    Sweep(Common),
    /// Run the bundled property suites.
    Verify(Common),
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&common.config)?;
    let mut cfg = cli::parse_config(&text)?;
    if let Some(out) = &common.out {
        cfg.out = Some(out.display().to_string());
    }
    if let Some(w) = common.workers {
        cfg.workers = Some(w);
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_out(cfg: &RunConfig, text: &str) -> std::io::Result<()> {
    if let Some(out) = &cfg.out {
        std::fs::write(out, text)?;
    }
    Ok(())
}

/// Exit code for errors that occur before any solver runs (bad config or
/// inadmissible parameters).
fn input_error(e: &Error) -> ExitCode {
    eprintln!("{e}");
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Argument(_) | Error::Io(_) => {
            ExitCode::from(2)
        }
        _ => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Constants(common) => {
            let cfg = match load(common) {
                Ok(c) => c,
                Err(e) => return input_error(&e),
            };
            match cli::run_constants(&cfg) {
                Ok((bundle, table)) => {
                    print!("{table}");
                    if let Some(out) = &cfg.out {
                        let payload = if out.ends_with(".json") {
                            serde_json::to_string_pretty(&bundle).expect("bundle serializes")
                        } else {
                            table.clone()
                        };
                        if let Err(e) = std::fs::write(out, payload) {
                            return input_error(&Error::Io(e));
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => input_error(&e),
            }
        }
        Command::TorsionCheck(common) => {
            let cfg = match load(common) {
                Ok(c) => c,
                Err(e) => return input_error(&e),
            };
            match cli::run_torsion_check(&cfg) {
                Ok(report) => {
                    print!("{report}");
                    if write_out(&cfg, &report).is_err() {
                        return ExitCode::from(2);
                    }
                    ExitCode::SUCCESS
                }
                Err(e @ (Error::Config(_) | Error::Domain(_) | Error::Argument(_))) => {
                    input_error(&e)
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(3)
                }
            }
        }
        Command::Solve(common) => {
            let cfg = match load(common) {
                Ok(c) => c,
                Err(e) => return input_error(&e),
            };
            match cli::run_solve(&cfg) {
                Ok(report) => {
                    print!("{report}");
                    ExitCode::SUCCESS
                }
                Err(e @ (Error::Config(_) | Error::Domain(_) | Error::Argument(_))) => {
                    input_error(&e)
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(4)
                }
            }
        }
        Command::Sweep(common) => {
            let cfg = match load(common) {
                Ok(c) => c,
                Err(e) => return input_error(&e),
            };
            match cli::run_sweep(&cfg) {
                Ok((csv, all_ok)) => {
                    print!("{csv}");
                    if write_out(&cfg, &csv).is_err() {
                        return ExitCode::from(2);
                    }
                    if all_ok {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("one or more below-threshold sweep points failed");
                        ExitCode::from(4)
                    }
                }
                Err(e) => input_error(&e),
            }
        }
        Command::Verify(common) => {
            let cfg = match load(common) {
                Ok(c) => c,
                Err(e) => return input_error(&e),
            };
            match cli::run_verify(&cfg) {
                Ok((matrix, all_pass)) => {
                    print!("{matrix}");
                    if write_out(&cfg, &matrix).is_err() {
                        return ExitCode::from(2);
                    }
                    if all_pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(5)
                    }
                }
                Err(e) => input_error(&e),
            }
        }
    }
}
