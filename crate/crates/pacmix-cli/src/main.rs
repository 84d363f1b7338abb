//! Command-line front end: dataset simulation, model fitting, artifact
//! evaluation, and benchmark reproduction.

mod artifact;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Errors carrying their process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed config, bad arguments, method/data mismatch (exit 2).
    Config(String),
    /// Filesystem failure (exit 3).
    Io(String),
    /// Numeric failure, e.g. a non-finite objective (exit 4).
    Numeric(String),
    /// Artifact schema mismatch or corruption (exit 5).
    Artifact(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Artifact(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Numeric(m) | CliError::Artifact(m) => m,
        }
    }
}

impl From<pacmix::Error> for CliError {
    fn from(e: pacmix::Error) -> Self {
        match e {
            pacmix::Error::InvalidArgument(_)
            | pacmix::Error::ShapeMismatch(_)
            | pacmix::Error::CsvParse { .. } => CliError::Config(e.to_string()),
            pacmix::Error::Io(_) => CliError::Io(e.to_string()),
            pacmix::Error::Numerical(_) | pacmix::Error::InfiniteDivergence => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "pacmix",
    version,
    about = "Model averaging by risk-bound minimization: simulate data, fit mixtures, evaluate, reproduce benchmarks"
)]
struct Cli {
    /// Base seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic dataset CSVs from a config.
    Simulate {
        /// TOML config with a [dataset] block.
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit a mixture and write a run artifact.
    Fit {
        /// rbm | sbs | hdr | baseline
        method: String,
        /// TOML config ([candidates], [bound], [sbs], [hdr], [baseline]).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Data CSVs. rbm/baseline: one training set; sbs: one pool csv
        /// (or none with [sbs.generator]); hdr: history csvs then the
        /// new-task csv last.
        #[arg(long, num_args = 0..)]
        data: Vec<PathBuf>,
    },
    /// Evaluate a run artifact on a test set.
    Eval {
        artifact: PathBuf,
        /// Held-out CSV; prediction error is measured against its raw
        /// responses ("predictive").
        #[arg(long)]
        test_csv: Option<PathBuf>,
        /// Synthetic test config; prediction error is measured against
        /// the noiseless signal.
        #[arg(long)]
        test_spec: Option<PathBuf>,
    },
    /// Re-run a benchmark grid and write summary CSVs.
    Reproduce {
        /// t2 | t3 | t4 | t5 | fig3
        table: String,
        #[arg(long, default_value_t = 100)]
        reps: usize,
    },
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure threads: {e}")))?;
    }
    match &cli.command {
        Command::Simulate { config } => commands::cmd_simulate(config, &cli.out, cli.seed),
        Command::Fit {
            method,
            config,
            data,
        } => commands::cmd_fit(method, config.as_deref(), data, &cli.out, cli.seed),
        Command::Eval {
            artifact,
            test_csv,
            test_spec,
        } => commands::cmd_eval(
            artifact,
            test_csv.as_deref(),
            test_spec.as_deref(),
            &cli.out,
            cli.seed,
        ),
        Command::Reproduce { table, reps } => {
            commands::cmd_reproduce(table, *reps, &cli.out, cli.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
