use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use muxsec_cli::{describe, run, CliError};

#[derive(Parser)]
#[command(name = "muxsec", version, about = "Secure multiplex coding experiments")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment config and write its reports.
    Run { config: PathBuf },
    /// Print the computation plan without executing it.
    Describe {
        config: PathBuf,
        /// Emit the plan as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("{}", err.record());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match run(&config, cli.out.as_deref(), cli.threads) {
            Ok(outcome) => {
                for (name, _) in &outcome.report.files {
                    println!("{}", outcome.out_dir.join(name).display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Describe { config, json } => match describe(&config) {
            Ok(plan) if json => {
                println!("{}", serde_json::to_string_pretty(&plan).expect("plan serializes"));
                ExitCode::SUCCESS
            }
            Ok(plan) => {
                print!("{plan}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
