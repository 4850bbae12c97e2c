//! `nclift`: compute mixed moments of universal products of states, verify
//! the lift axioms, classify product specifications and regenerate the
//! classification tables.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Exit statuses: 0 success, 1 verification mismatch, 2 input error,
/// 3 truncation overflow.
#[derive(Debug)]
pub enum Failure {
    /// A verification produced an unexpected outcome.
    Mismatch(String),
    /// Malformed or inadmissible input.
    Input(String),
    /// A word would exceed the truncation bound.
    Truncation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Input(_) => 2,
            Failure::Truncation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Mismatch(m) | Failure::Input(m) | Failure::Truncation(m) => m,
        }
    }
}

impl From<nclift::Error> for Failure {
    fn from(e: nclift::Error) -> Self {
        match e {
            nclift::Error::Truncation { .. } => Failure::Truncation(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "nclift",
    version,
    about = "Universal lifts and multi-faced products of states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

/// Options shared by every command.
#[derive(Debug, Clone, clap::Args)]
pub struct RunConfig {
    /// Product specification (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Moment word (JSON array of letters).
    #[arg(long, global = true)]
    pub word: Option<PathBuf>,
    /// Factor dimensions, e.g. `2,3`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Random trials per check.
    #[arg(long, global = true, default_value_t = 10)]
    pub trials: usize,
    /// Seed of all random data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance for comparisons.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Output format (tables default to CSV, everything else to JSON).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (standard output if omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn validate(&self) -> Result<(), Failure> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Failure::Input(format!("--tol must be positive, got {}", self.tol)));
        }
        if let Some(dims) = &self.dims {
            if dims.iter().any(|&d| d < 1) {
                return Err(Failure::Input("--dims entries must be at least 1".into()));
            }
        }
        for path in [&self.spec, &self.word].into_iter().flatten() {
            if !path.exists() {
                return Err(Failure::Input(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mixed moment of a word from the operator model and the path oracle.
    Moment {
        /// Maximal word length of the path oracle's graph (default: enough
        /// for the word).
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Run the axiom suite of a family; exit 1 on unexpected outcomes.
    Verify {
        /// tensor, free, naive-free, products or all (default: all, unless
        /// --spec is given, in which case only that spec is checked).
        #[arg(long)]
        family: Option<String>,
    },
    /// Canonical form and name of the product induced by a spec.
    Classify,
    /// Classification tables and boundary sweeps.
    Table {
        /// tensor, free, sweep-tensor, sweep-free or sweep-free-mixed.
        #[arg(long)]
        which: String,
    },
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(value) = std::env::var("NCLIFT_THREADS") {
        let n: usize = value
            .parse()
            .map_err(|_| Failure::Input(format!("NCLIFT_THREADS must be a positive integer, got {value:?}")))?;
        if n == 0 {
            return Err(Failure::Input("NCLIFT_THREADS must be a positive integer".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(format!("cannot configure threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    cli.config.validate()?;
    let config = &cli.config;
    match cli.command {
        Command::Moment { max_len } => commands::moment(config, max_len),
        Command::Verify { family } => commands::verify(config, family.as_deref()),
        Command::Classify => commands::classify(config),
        Command::Table { which } => commands::table(config, &which),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
