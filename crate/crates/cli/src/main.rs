use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kapitza_cli::commands::{self, Io};
use kapitza_cli::config::RunConfig;
use kapitza_cli::Failure;

#[derive(Parser)]
#[command(
    name = "kapitza",
    version,
    about = "Spherical pendulum with a vibrating pivot and horizontal forcing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for `sweep`.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Suppress progress messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate,
    /// Find a T-periodic orbit and write it as JSON.
    FindOrbit,
    /// Recheck a stored orbit and recompute its Floquet multipliers.
    Floquet {
        /// Orbit JSON written by `find-orbit`.
        #[arg(long)]
        orbit: PathBuf,
    },
    /// Sample the four boundary sign conditions.
    CheckLemmas,
    /// Distance between the full and averaged solutions over a list of epsilons.
    AvgCompare,
    /// Find orbits over a grid of k and forcings and write a CSV table.
    Sweep,
    /// Integrate past the transient and write the end state as JSON.
    Seed,
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required for this command".into()))?;
    RunConfig::load(path)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let io = Io {
        out: cli.out.clone(),
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Floquet { orbit } => commands::floquet_cmd(orbit, &io),
        Command::Simulate => commands::simulate(&load(cli)?, &io),
        Command::FindOrbit => commands::find_orbit(&load(cli)?, &io),
        Command::CheckLemmas => commands::check_lemmas(&load(cli)?, &io),
        Command::AvgCompare => commands::avg_compare_cmd(&load(cli)?, &io),
        Command::Sweep => {
            let jobs = match cli.jobs {
                Some(0) => return Err(Failure::Config("--jobs must be at least 1".into())),
                Some(n) => n,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            commands::sweep(&load(cli)?, &io, jobs)
        }
        Command::Seed => commands::seed(&load(cli)?, &io),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
