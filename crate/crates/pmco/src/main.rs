use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pmco::cli;

#[derive(Parser)]
#[command(name = "pmco", about = "Paracontracting multiagent coordination optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimization from a JSON config.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the randomized verification sweeps.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analyze one switched-system instance.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Optimize {
            config,
            out,
            seed,
            workers,
        } => match cli::cmd_optimize(&config, &out, seed, workers) {
            Ok(()) => cli::EXIT_OK,
            Err(e) => {
                eprintln!("optimize failed: {e}");
                cli::exit_code_for(&e)
            }
        },
        Command::Verify { config, out } => match cli::cmd_verify(&config, &out) {
            Ok(true) => cli::EXIT_OK,
            Ok(false) => {
                eprintln!("verification sweeps reported failures; see verify_summary.json");
                cli::EXIT_VERIFY_FAILED
            }
            Err(e) => {
                eprintln!("verify failed: {e}");
                cli::exit_code_for(&e)
            }
        },
        Command::Analyze { config, out } => match cli::cmd_analyze(&config, &out) {
            Ok(_) => cli::EXIT_OK,
            Err(e) => {
                eprintln!("analyze failed: {e}");
                cli::exit_code_for(&e)
            }
        },
    };
    ExitCode::from(code as u8)
}
