//! Driver for the space-time cut finite element solver: single runs,
//! convergence studies and randomized form checks, configured by JSON.

pub mod check;
pub mod config;
pub mod error;
pub mod single;
pub mod study;
pub mod svg;


use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::Config;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "stcutfem", version, about = "Space-time cut FEM for the heat equation on overlapping meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Overrides `output.dir` of the configuration.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,

    /// Seed for the random vectors of `check`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Only report errors.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve once and write the sampled solution and the geometry trace.
    Solve { config: PathBuf },
    /// Run the configured convergence study.
    Converge { config: PathBuf },
    /// Check coercivity and the integration-by-parts identity on random functions.
    Check {
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

fn output_dir(cli: &Cli, config: &Config) -> PathBuf {
    cli.output_dir.clone().unwrap_or_else(|| config.output.dir.clone())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve { config } => {
            let config = Config::load(config)?;
            let report = single::run_single(&config)?;
            let dir = output_dir(cli, &config);
            single::write_single(&report, &dir)?;
            if !cli.quiet {
                println!(
                    "solved {} slabs, wrote {} samples to {}",
                    report.trace.len(),
                    report.samples.len(),
                    dir.display()
                );
            }
            Ok(())
        }
        Command::Converge { config } => {
            let config = Config::load(config)?;
            let report = study::run_convergence(&config)?;
            let dir = output_dir(cli, &config);
            study::write_convergence(&report, &config, &dir)?;
            if !cli.quiet {
                for row in &report.rows {
                    match (&row.outcome, row.error_x()) {
                        (Ok(_), Some(e)) => println!("{:>6}  error {e:.6e}  ({:.2} s)", row.resolution, row.runtime_s),
                        (Err(msg), _) => println!("{:>6}  failed: {msg}", row.resolution),
                        _ => {}
                    }
                }
                match report.slope() {
                    Some(s) => println!(
                        "slope over rows {}-{}: {s:.4} (reference {})",
                        report.fit_window[0], report.fit_window[1], report.reference_slope
                    ),
                    None => println!("no slope: a row in the fit window failed"),
                }
            }
            let failed: Vec<String> = report.failures().map(|(r, m)| format!("{r}: {m}")).collect();
            if !failed.is_empty() {
                return Err(CliError::Numerical(failed.join("; ")));
            }
            Ok(())
        }
        Command::Check { config, samples } => {
            let config = Config::load(config)?;
            let report = check::run_check(&config, cli.seed, *samples)?;
            if !cli.quiet {
                println!(
                    "{} samples: min coercivity {:.4}, max identity gap {:.3e}",
                    report.samples, report.min_coercivity, report.max_identity_gap
                );
            }
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Numerical(format!(
                    "coercivity {:.4} (floor {}) or identity gap {:.3e} (tolerance {:e}) out of bounds",
                    report.min_coercivity,
                    check::COERCIVITY_FLOOR,
                    report.max_identity_gap,
                    check::IDENTITY_TOL
                )))
            }
        }
    }
}
