//! `sidplan`: departure route design and flight allocation from the command line.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sidplan::Mode;

use error::CliError;

#[derive(Parser)]
#[command(name = "sidplan", version, about = "Noise- and fuel-aware departure route design and flight allocation")]
#[command(after_help = "Exit codes: 0 ok, 2 usage, 3 invalid scenario or archive, 4 infeasible schedule, 5 empty archive, 6 I/O failure.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check a scenario without optimizing.
    Validate {
        /// Scenario file (TOML).
        scenario: PathBuf,
    },
    /// Step 1: design a Pareto set of routes for every SID and store them as archives.
    DesignRoutes {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Only design these SIDs (repeatable). [default: all]
        #[arg(long = "sid", value_name = "NAME")]
        sids: Vec<String>,
        /// Assumed total movements per SID, split over types and periods like the
        /// schedule. [default: the most the SID can be allocated]
        #[arg(long, value_name = "FLIGHTS")]
        design_flights: Option<u32>,
    },
    /// Step 2: pick one archived route per SID and allocate the flight schedule.
    Allocate {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Directory holding the Step-1 archives. [default: the output directory]
        #[arg(long, value_name = "DIR")]
        archives: Option<PathBuf>,
        /// Use archives built for a different version of the scenario.
        #[arg(long)]
        allow_hash_mismatch: bool,
    },
    /// Optimize all routes and the allocation together as one problem.
    Integrated {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Design one SID under several assumed flight counts and compare the fronts.
    Sensitivity {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// SID to study. [default: the first SID]
        #[arg(long, value_name = "NAME")]
        sid: Option<String>,
        /// Assumed total movements, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "50,100,150", value_name = "FLIGHTS")]
        flights: Vec<u32>,
    },
    /// Export fronts, tracks, profiles and Lden contours from saved results.
    Export {
        /// Route archive files (repeatable).
        #[arg(long = "archive", value_name = "FILE", required = true)]
        archives: Vec<PathBuf>,
        /// Allocation result written by `allocate`; adds allocation tracks and contours.
        #[arg(long, value_name = "FILE")]
        allocation: Option<PathBuf>,
        /// Allocation solution to draw contours for.
        #[arg(long, default_value_t = 0, value_name = "ID")]
        solution: usize,
        /// Contour level, dBA Lden.
        #[arg(long, default_value_t = 55.0, value_name = "DB")]
        threshold_db: f64,
        /// Evening penalty, dB.
        #[arg(long, default_value_t = 5.0, value_name = "DB")]
        evening_penalty_db: f64,
        /// Night penalty, dB.
        #[arg(long, default_value_t = 10.0, value_name = "DB")]
        night_penalty_db: f64,
        /// Output directory.
        #[arg(long, short, value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Output directory (created if missing).
    #[arg(long, short, value_name = "DIR")]
    out: PathBuf,
    /// Route design mode: 2d (lateral only) or 3d (lateral and vertical).
    #[arg(long, default_value = "2d", value_name = "MODE")]
    mode: Mode,
    /// RNG seed. [default: the scenario's seed]
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for evaluations; 0 uses every available core.
    #[arg(long, default_value_t = 0, value_name = "N")]
    workers: usize,
    /// Generations. [default: the scenario's optimizer setting]
    #[arg(long, value_name = "N")]
    generations: Option<usize>,
    /// Population size. [default: the scenario's optimizer setting]
    #[arg(long, value_name = "N")]
    population: Option<usize>,
    /// Generations between progress lines on standard error; 0 disables them.
    #[arg(long, default_value_t = 10, value_name = "N")]
    progress_every: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
