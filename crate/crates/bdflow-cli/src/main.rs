use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bdflow_cli::commands::{self, Report};
use bdflow_cli::error::CliError;
use bdflow_cli::export::{self, OutFormat};

#[derive(Parser)]
#[command(
    name = "bdflow",
    version,
    about = "BDF time discretizations of semiconvex gradient flows: \
             integration, stability certificates, and descent audits"
)]
struct Cli {
    /// Write the data payload to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Payload format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Seed for randomized corroboration sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the BDF3 stability constant beta_3 = 95/96 three ways.
    CertifyBeta3 {
        /// Random parameter draws for the corroboration sweep.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Print the quadratic-form decomposition at a correction strength.
    Decompose {
        /// Strength as a float or a fraction like 95/96.
        #[arg(long)]
        beta: String,
    },
    /// Integrate a configured gradient flow and audit its descent.
    Run {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Show the alternating trajectory that never dissipates past the
    /// stability threshold.
    Counterexample {
        /// BDF order (1, 2, or 3).
        #[arg(long, default_value_t = 3)]
        k: u8,
        /// Length of the alternating state list.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Step size; the barrier curvature is matched to it.
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
    },
    /// Measure the convergence order of BDFk against a reference.
    OrderStudy {
        /// TOML order-study configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Enumerate the solution branches of one multivalued step and audit
    /// each branch.
    MultivaluedDemo {
        /// TOML multivalued-demo configuration.
        #[arg(long)]
        config: PathBuf,
    },
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::CertifyBeta3 { samples } => {
            commands::certify::execute(*samples, cli.seed, cli.format)
        }
        Command::Decompose { beta } => commands::decompose::execute(beta, cli.format),
        Command::Run { config } => commands::run::execute(config, cli.format),
        Command::Counterexample { k, steps, dt } => {
            commands::counterexample::execute(*k, *steps, *dt, cli.format)
        }
        Command::OrderStudy { config } => commands::order_study::execute(config, cli.format),
        Command::MultivaluedDemo { config } => commands::multivalued::execute(config, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(report) => {
            for note in &report.notes {
                eprintln!("{note}");
            }
            match export::emit(&report.payload, cli.out.as_deref()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
