use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use imf_cli::{command_run, command_sweep, command_verify_geometry};

#[derive(Parser)]
#[command(
    name = "imf-lab",
    version,
    about = "Iterative Markovian fitting laboratory: runs, sweeps and geometry certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for report files (overrides the config's output.directory).
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Suppress console output; reports are still written.
    #[arg(long, global = true)]
    quiet: bool,

    /// Replace every certificate's slack tolerance with this value.
    #[arg(long, global = true, value_name = "FLOAT")]
    tolerance_override: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one configured run and write its report files.
    Run { config: PathBuf },
    /// Execute every seed of a configured sweep and aggregate the results.
    Sweep { config: PathBuf },
    /// Certify the subspace-projection geometry of a bare state space.
    VerifyGeometry {
        #[arg(long)]
        cardinality: usize,
        #[arg(long)]
        interior: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output_dir = cli.output_dir.as_deref();
    let code = match cli.command {
        Command::Run { config } => {
            command_run(&config, output_dir, cli.quiet, cli.tolerance_override)
        }
        Command::Sweep { config } => {
            command_sweep(&config, output_dir, cli.quiet, cli.tolerance_override)
        }
        Command::VerifyGeometry {
            cardinality,
            interior,
            trials,
            seed,
        } => command_verify_geometry(
            cardinality,
            interior,
            trials,
            seed,
            output_dir,
            cli.quiet,
            cli.tolerance_override,
        ),
        Command::Version => {
            println!("imf-lab {}", env!("CARGO_PKG_VERSION"));
            0
        }
    };
    ExitCode::from(code as u8)
}
