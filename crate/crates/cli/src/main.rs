//! `esl`: attitude experiments from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 mathematical singularity,
//! 3 I/O, schema or usage error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use esl_core::EslError;

use crate::commands::VerificationFailed;

#[derive(Debug, Parser)]
#[command(name = "esl", version, about = "Euler axis/angle kinematics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the attitude ODE and write the trajectory with any configured analyses
    Simulate(config::Overrides),
    /// Sample the closed-form solution for constant angular velocity
    Spinor(commands::SpinorArgs),
    /// Run one analysis on a trajectory file or configuration
    Analyze {
        #[command(subcommand)]
        what: commands::AnalyzeCommand,
    },
    /// Run the acceptance checks and print a report
    Verify(commands::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = limit_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(3);
    }
    let result = match cli.command {
        Command::Simulate(o) => commands::simulate(&o),
        Command::Spinor(a) => commands::spinor(&a),
        Command::Analyze { what } => commands::analyze(&what),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Caps the rayon pool at `ESL_THREADS` when set.
fn limit_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("ESL_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| anyhow::anyhow!("ESL_THREADS must be a positive integer, got '{value}'"))?;
    anyhow::ensure!(n > 0, "ESL_THREADS must be a positive integer, got '{value}'");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerificationFailed>().is_some() {
        return 1;
    }
    match e.chain().find_map(|c| c.downcast_ref::<EslError>()) {
        Some(
            EslError::GibbsSingularity { .. }
            | EslError::AxisUndefined
            | EslError::NotDifferentiable { .. }
            | EslError::BoundarySingularity { .. }
            | EslError::Aborted { .. }
            | EslError::ParityUndetermined { .. }
            | EslError::ParallelAxis { .. }
            | EslError::TrajectoryAborted { .. },
        ) => 2,
        _ => 3,
    }
}
