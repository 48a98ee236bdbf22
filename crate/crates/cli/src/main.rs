//! `excoll`: enumerate, verify, rank, orbit and certify collections from the
//! command line.
//!
//! Exit codes: 0 on success, 1 when a mathematical check fails, 2 on a usage
//! error (bad flags, unsupported space or variant).

mod commands;
mod inject;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "excoll",
    version,
    about = "Equivariant exceptional collections on moduli of weighted points on P1"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the payload to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, env = "EXCOLL_JOBS", global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    /// Number of heavy markings.
    #[arg(long)]
    p: usize,
    /// Number of light markings.
    #[arg(long, default_value_t = 0)]
    q: usize,
    /// Collection variant: 1A, 1B, or with complexes 1A+2A, 1B+2B, ...
    #[arg(long)]
    variant: Option<String>,
    /// Debug injections: `F:<l>:<set>`, `T:<l>:<set>`, `drop:<index>`, and for
    /// `certify` also `tamper`. Sets are `empty` or comma lists like `0,2`.
    #[arg(long)]
    inject: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the ordered collection.
    Enumerate(SpaceArgs),
    /// Check every pairwise vanishing condition of the collection.
    Verify(SpaceArgs),
    /// Rank of the Grothendieck group from the wall-crossing oracle.
    Rank(RankArgs),
    /// Orbits and the decomposition of the permutation character.
    Orbits(SpaceArgs),
    /// Generation certificates for all labels up to a bound on `l`.
    Certify(CertifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    /// `M̄_{0,n}` with all weights one.
    #[arg(long, conflicts_with_all = ["p", "weights"])]
    n: Option<usize>,
    /// Heavy markings of `M̄_{p,q}`.
    #[arg(long, conflicts_with = "weights")]
    p: Option<usize>,
    /// Light markings of `M̄_{p,q}`.
    #[arg(long, requires = "p")]
    q: Option<usize>,
    /// Explicit generic weights, comma separated rationals like `1/2,1/2,1`.
    #[arg(long)]
    weights: Option<String>,
    /// Collection variant used for the length comparison.
    #[arg(long, requires = "p")]
    variant: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Largest `l` among the certified labels.
    #[arg(long, default_value_t = 4)]
    lmax: i64,
    /// Include every certificate in JSON output.
    #[arg(long)]
    certificates: bool,
}

/// What a command produced.
pub struct Outcome {
    /// Payload in the requested format.
    pub payload: String,
    /// One-line summary printed when the payload goes to a file.
    pub summary: String,
    /// Whether every mathematical check passed.
    pub ok: bool,
}

/// A command failure, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Math(String),
}

impl From<excoll::Error> for Failure {
    fn from(e: excoll::Error) -> Self {
        use excoll::Error::*;
        match e {
            NotInvariant(_)
            | Decomposition(_)
            | Cyclic(_)
            | Descent(_)
            | NoCase(_)
            | WindowInapplicable { .. } => Failure::Math(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Enumerate(a) => commands::enumerate(a, cli.format),
        Command::Verify(a) => commands::verify(a, cli.format),
        Command::Rank(a) => commands::rank(a, cli.format),
        Command::Orbits(a) => commands::orbits(a, cli.format),
        Command::Certify(a) => commands::certify(a, cli.format),
    };
    match result {
        Ok(out) => {
            if let Err(e) = emit(&out, cli.out.as_ref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                if cli.out.is_some() || cli.format != Format::Text {
                    eprintln!("FAILED: {}", out.summary);
                }
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Math(msg)) => {
            eprintln!("FAILED: {msg}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: &Outcome, path: Option<&PathBuf>) -> std::io::Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, &out.payload)?;
            println!("{}", out.summary);
        }
        None => print!("{}", out.payload),
    }
    Ok(())
}
