//! Command-line front end for hamforge: file formats and the `spectrum`, `compile`,
//! `verify`, `classify` and `tables` commands.
//!
//! Exit codes are 0 on success, 2 when a certification or verification fails, and 3 for
//! parse, usage and input errors.

pub mod commands;
pub mod error;
pub mod format;
pub mod numfmt;

use clap::{Parser, Subcommand};
use commands::{CompileArgs, Output, VerifyArgs};
use error::{CliError, EXIT_USAGE};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "hamforge",
    version,
    about = "Compile and certify local Hamiltonian simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the lowest eigenvalues of a Hamiltonian file.
    Spectrum {
        path: PathBuf,
        /// Number of eigenvalues; all of them when omitted.
        #[arg(short = 'k', long = "count")]
        count: Option<usize>,
    },
    /// Compile a Hamiltonian into a target family and print the plan.
    Compile {
        path: PathBuf,
        /// heisenberg, xy, no_y_pauli or real_2local_with_fields.
        #[arg(long)]
        family: String,
        #[arg(long)]
        eps: f64,
        /// Defaults to the value of --eps.
        #[arg(long)]
        eta: Option<f64>,
        /// Route the result onto the square lattice.
        #[arg(long)]
        lattice: bool,
        /// Verify every pass and the end-to-end simulation by exact diagonalization.
        #[arg(long)]
        certify: bool,
        /// Simulator file; the plan and encoding are written beside it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a simulator against an encoded target below an energy cutoff.
    Verify {
        target: PathBuf,
        sim: PathBuf,
        encoding: PathBuf,
        #[arg(long)]
        delta: f64,
        /// Inverse temperature for the partition-function bound.
        #[arg(long)]
        beta: Option<f64>,
        /// Comma-separated times for the time-evolution bound.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        /// Required ε; the report fails when the measured value exceeds it.
        #[arg(long)]
        eps: Option<f64>,
        /// Required η.
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Classify an interaction set as classical, stoquastic or universal.
    Classify { path: PathBuf },
    /// Print the one- and two-logical-qubit perturbation tables of the 4-qubit gadget.
    Tables {
        /// Use the XY interaction instead of Heisenberg.
        #[arg(long)]
        xy: bool,
    },
}

/// Result of one invocation.
pub struct Run {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn execute(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Spectrum { path, count } => commands::spectrum(&path, count),
        Command::Compile {
            path,
            family,
            eps,
            eta,
            lattice,
            certify,
            out,
        } => commands::compile_cmd(&CompileArgs {
            path,
            family,
            eps,
            eta: eta.unwrap_or(eps),
            lattice,
            certify,
            out,
        }),
        Command::Verify {
            target,
            sim,
            encoding,
            delta,
            beta,
            times,
            eps,
            eta,
        } => commands::verify_cmd(&VerifyArgs {
            target,
            sim,
            encoding,
            delta,
            beta,
            times,
            eps,
            eta,
        }),
        Command::Classify { path } => commands::classify_cmd(&path),
        Command::Tables { xy } => commands::tables_cmd(xy),
    }
}

/// Parses `args` (program name first) and runs the command without touching the process
/// streams.
pub fn run<I, T>(args: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Run {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_USAGE,
                }
            } else {
                Run {
                    stdout: text,
                    stderr: String::new(),
                    code: 0,
                }
            };
        }
    };
    match execute(cli) {
        Ok(out) => Run {
            stdout: out.stdout,
            stderr: String::new(),
            code: out.code,
        },
        Err(e) => Run {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: e.exit_code(),
        },
    }
}
