use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use martinlab::{catalog, run_file, RunOptions};

#[derive(Parser)]
#[command(name = "martinlab", version, about = "Potential theory experiments for isotropic stable processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a JSON configuration.
    Run {
        config: PathBuf,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the study catalog.
    ListStudies {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListStudies { json } => {
            if json {
                println!("{}", catalog::json());
            } else {
                print!("{}", catalog::text());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, threads, seed } => {
            if threads == Some(0) {
                eprintln!("error: --threads must be at least 1");
                return ExitCode::from(martinlab::EXIT_SCHEMA as u8);
            }
            let opts = RunOptions {
                threads,
                seed,
                out: std::env::var_os("MARTINLAB_OUT").map(PathBuf::from),
            };
            match run_file(&config, &opts) {
                Ok(out) => {
                    println!("{}", out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
