//! `verdict`: solve, simulate, play and analyze verdict games from the
//! command line. Exit codes: 0 success, 1 usage or config error, 2 runtime
//! failure.

mod commands;
mod human;
mod report;
mod setup;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    /// Backward induction (complete information) or the brute-force pure-PBE
    /// search (Bayesian games).
    Exact,
    /// Brute-force equilibrium oracle.
    Bruteforce,
    Mcts,
    Ismcts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Mock,
    Live,
}

#[derive(Parser)]
#[command(name = "verdict", version, about = "Verdict game engine")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Verbose output (repeatable).
    #[arg(short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured game and report root values and policy size.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Write the full solver output as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "exact")]
        engine: EngineArg,
        /// Search iterations (mcts/ismcts engines).
        #[arg(long, default_value_t = 10_000)]
        iterations: u64,
        /// Search seed (mcts/ismcts engines).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the configured experiment arms and print summaries and p-values.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Append match records as line-delimited JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the experiment's base seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "mock")]
        backend: BackendArg,
    },
    /// Interactive match: a human seat against a configured opponent.
    Play {
        #[arg(long)]
        config: PathBuf,
        /// Override the session seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "mock")]
        backend: BackendArg,
    },
    /// Recompute summaries and p-values from persisted records and verify
    /// that recorded verdicts replay.
    Analyze {
        /// Records file written by `simulate` or `replicate-court`.
        records: PathBuf,
    },
    /// The courtroom experiment as a single command: strategic prosecutor
    /// (breadth 10, depth 1) versus naive, 100 matches per arm, free-text
    /// agents and judge over the bundled fixtures.
    ReplicateCourt {
        #[arg(long, value_enum, default_value = "mock")]
        backend: BackendArg,
        /// Prompt and mock-reply fixture directory.
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed for the match batch.
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Matches per arm.
        #[arg(long, default_value_t = 100)]
        matches: u64,
        /// Judge/player model id for the live backend.
        #[arg(long, default_value = "gpt-4o")]
        model: String,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation, missing or invalid config: exit 1.
    Usage(String),
    /// Failure while executing a valid request: exit 2.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let verbose = cli.verbose > 0;
    match cli.command {
        Command::Solve {
            config,
            out,
            engine,
            iterations,
            seed,
        } => commands::solve(&config, out.as_deref(), engine, iterations, seed, verbose),
        Command::Simulate {
            config,
            out,
            seed,
            backend,
        } => commands::simulate(&config, out.as_deref(), seed, backend, verbose),
        Command::Play {
            config,
            seed,
            backend,
        } => commands::play(&config, seed, backend),
        Command::Analyze { records } => commands::analyze(&records, verbose),
        Command::ReplicateCourt {
            backend,
            fixtures,
            out,
            seed,
            matches,
            model,
        } => commands::replicate_court(backend, &fixtures, out.as_deref(), seed, matches, &model, verbose),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
