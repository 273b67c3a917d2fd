//! `oblique`: load a weight and a subspace from JSON files, run one
//! operation and print a JSON report.

mod battery;
mod job;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use job::{Formula, JobSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Compatibility report: flags, N, d and P_{A,S}.
    Compat,
    /// The projection P_{A,S} by one construction, cross-checked by the others.
    Project,
    /// Reduced solution of A X = B.
    Douglas,
    /// Minimal-seminorm interpolant of x along S.
    Interpolate,
    /// Range-space projection, extension map and related identities.
    Oprange,
    /// Full identity battery with seeded random checks.
    Report,
}

#[derive(Debug, Parser)]
#[command(
    name = "oblique",
    version,
    about = "A-Hermitian oblique projections and related computations"
)]
struct Cli {
    command: Command,
    /// Weight (or left factor for `douglas`), a matrix file.
    #[arg(long, value_name = "FILE")]
    input_a: Option<PathBuf>,
    /// Subspace file.
    #[arg(long, value_name = "FILE")]
    input_s: Option<PathBuf>,
    /// Right-hand side for `douglas`, operator for `oprange`.
    #[arg(long, value_name = "FILE")]
    input_b: Option<PathBuf>,
    /// Point to interpolate, an n x 1 matrix file.
    #[arg(long, value_name = "FILE")]
    input_x: Option<PathBuf>,
    /// Relative singular-value cutoff.
    #[arg(long, value_name = "R", default_value_t = 1e-10)]
    tol_rank: f64,
    /// Absolute equality threshold.
    #[arg(long, value_name = "E", default_value_t = 1e-8)]
    tol_eq: f64,
    /// Seed for randomized checks.
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Construction used by `project`.
    #[arg(long, value_enum, default_value_t = Formula::Block)]
    formula: Formula,
    /// `douglas` only: fall back to least squares when B is not in the range
    /// of A.
    #[arg(long)]
    least_squares: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = JobSpec {
        command: cli.command,
        input_a: cli.input_a,
        input_s: cli.input_s,
        input_b: cli.input_b,
        input_x: cli.input_x,
        tol_rank: cli.tol_rank,
        tol_eq: cli.tol_eq,
        seed: cli.seed,
        formula: cli.formula,
        least_squares: cli.least_squares,
    };
    let outcome = job::run(&spec);
    let (doc, code) = match outcome {
        Ok(out) => (Some(out.document), out.code),
        Err(err) => {
            eprintln!("oblique: {err}");
            (None, err.exit_code())
        }
    };
    if let Some(doc) = doc {
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        let written = match &cli.output {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().write_all(text.as_bytes()),
        };
        if let Err(e) = written {
            eprintln!("oblique: cannot write report: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
