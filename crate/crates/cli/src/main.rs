use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod document;
mod error;

use config::{Overrides, RunConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(version, about = "Markov perfect wholesale pricing under demand learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `simulate.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accept `a1` on the boundary of the admissible range.
    #[arg(long)]
    allow_boundary_a1: bool,
}

impl ConfigArgs {
    fn load(&self) -> CliResult<RunConfig> {
        RunConfig::load(
            &self.config,
            &Overrides {
                seed: self.seed,
                out: self.out.clone(),
                allow_boundary_a1: self.allow_boundary_a1,
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the game by backward induction and write the policy tables.
    Solve(ConfigArgs),
    /// Monte Carlo profits under the equilibrium policy.
    Simulate {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Re-check a stored solution.
    Verify {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write a tidy CSV of the policy tables.
    ExportPlots {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Equilibrium play and values at a belief state.
    Query {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Price the retailer responds to instead of the equilibrium price.
        #[arg(long)]
        w: Option<f64>,
    },
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve(args) => print_paths(&commands::solve(&args.load()?)?),
        Command::Simulate { args, solution } => print_paths(&commands::simulate(&args.load()?, &solution)?),
        Command::Verify { solution, out } => {
            let report = commands::verify(&solution, &out)?;
            println!("{} checks passed", report.checks.len());
        }
        Command::ExportPlots { solution, out } => println!("{}", commands::export_plots(&solution, &out)?.display()),
        Command::Query { solution, t, a, b, w } => {
            let answer = commands::query(&solution, t, a, b, w)?;
            println!("{}", serde_json::to_string(&answer).map_err(|e| CliError::validation(e.to_string()))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.kind.exit_code() as u8)
        }
    }
}
