//! `mtransport`: solve discrete transport instances, compute optimal support
//! unions, run dyadic approximation and martingale coupling experiments, and
//! generate reproducible inputs.
//!
//! Exit codes: 0 success, 1 output failure, 2 configuration error, 3 instance
//! or solver error, 4 a checked bound failed.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mtransport_core::ArithmeticMode;

use commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "mtransport", version, about = "Exact discrete optimal transport experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config for the command.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for output artifacts (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Use the solver's vertex for non-unique parameters instead of failing.
    #[arg(long, global = true)]
    allow_nonunique: bool,

    /// Exact rational arithmetic: on, off, or auto (on up to 400 edges).
    #[arg(long, global = true, value_enum, default_value_t = Rational::Auto)]
    rational: Rational,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal plan for `{"mu", "nu", "p"}`.
    Solve,
    /// Union of supports of all optimal plans, with the uniqueness verdict.
    Psi,
    /// Dyadic step maps of a family up to level `K`, with their bounds.
    Dyadic,
    /// Martingale coupling experiment.
    Couple,
    /// Random measure or family files.
    Gen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Format::Csv
    }

    pub fn csv(self) -> bool {
        self != Format::Json
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rational {
    On,
    Off,
    Auto,
}

impl From<Rational> for ArithmeticMode {
    fn from(r: Rational) -> Self {
        match r {
            Rational::On => ArithmeticMode::Rational,
            Rational::Off => ArithmeticMode::Float,
            Rational::Auto => ArithmeticMode::Auto,
        }
    }
}

/// Options shared by every command.
pub struct Options {
    pub config: PathBuf,
    pub out: PathBuf,
    pub format: Format,
    pub allow_nonunique: bool,
    pub arithmetic: ArithmeticMode,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot configure {n} threads: {e}")))?;
    }
    let config = cli.config.ok_or_else(|| Failure::Config("--config is required".into()))?;
    let opts = Options {
        config,
        out: cli.out,
        format: cli.format,
        allow_nonunique: cli.allow_nonunique,
        arithmetic: cli.rational.into(),
    };
    match cli.command {
        Command::Solve => commands::solve(&opts),
        Command::Psi => commands::psi(&opts),
        Command::Dyadic => commands::dyadic(&opts),
        Command::Couple => commands::couple(&opts),
        Command::Gen => commands::gen(&opts),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
