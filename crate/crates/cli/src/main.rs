//! `neurofri`: run, verify and sweep event-driven FRI sampling scenarios.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 reconstruction failure or parameter error above tolerance.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod builtin;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "neurofri",
    version,
    about = "Threshold-crossing sampling and exact reconstruction of FRI signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode and reconstruct one scenario, writing events, report and plot tables.
    Run {
        /// Path to a TOML configuration or the name of a built-in scenario.
        scenario: String,
        /// Output directory [default: out/<scenario name>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid points per period for the encoder scan.
        #[arg(long)]
        grid_density: Option<usize>,
    },
    /// Run every built-in scenario plus property checks and print a summary table.
    Verify {
        /// Also write each scenario's artifacts under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        grid_density: Option<usize>,
    },
    /// Independent random single-channel trials.
    Sweep {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of innovations K.
        #[arg(long, default_value_t = 6)]
        model_order: usize,
        /// Signal class: dirac, pulse, d1 or d2.
        #[arg(long, default_value = "dirac")]
        class: String,
        /// Threshold as a fraction of the single-channel bound.
        #[arg(long, default_value_t = 0.9)]
        fraction: f64,
        /// Largest accepted parameter error.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        /// Output directory [default: out/sweep-<seed>].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        grid_density: Option<usize>,
    },
    /// List the built-in scenarios.
    List,
    /// Print the TOML configuration of a built-in scenario.
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            grid_density,
        } => commands::run(&scenario, out, grid_density),
        Command::Verify { out, grid_density } => commands::verify(out, grid_density),
        Command::Sweep {
            trials,
            seed,
            model_order,
            class,
            fraction,
            tolerance,
            out,
            grid_density,
        } => commands::sweep(&commands::SweepArgs {
            trials,
            seed,
            model_order,
            class,
            fraction,
            tolerance,
            out,
            grid_density,
        }),
        Command::List => commands::list(),
        Command::Show { name } => commands::show(&name),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
