use std::path::PathBuf;
use std::process::ExitCode;

use bloch_cli::{execute, Mode, Overrides};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bloch",
    version,
    about = "Bloch varieties, Dirac spectral curves and Weierstrass immersions on flat tori"
)]
struct Cli {
    /// Worker threads; overrides BLOCH_THREADS and the config.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task named in the config.
    Run { config: PathBuf },
    /// Run the invariant suite against the config's lattice and potential.
    Verify { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (mode, config) = match cli.command {
        Command::Run { config } => (Mode::Run, config),
        Command::Verify { config } => (Mode::Verify, config),
    };
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be positive");
        return ExitCode::from(2);
    }
    let overrides = Overrides {
        threads: cli.threads,
        output: cli.output,
        seed: cli.seed,
    };
    match execute(mode, &config, overrides) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            println!("artifacts: {}", outcome.output_dir.display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
