mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mermin_lhv::exact::parse_rational;
use mermin_lhv::{Mode, Rational};

/// Detection-efficiency thresholds for LHV simulation of GHZ/Mermin statistics.
#[derive(Debug, Parser)]
#[command(name = "mermin-lhv", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mermin operator, LHV bound, quantum value and critical parameters.
    Bounds {
        #[arg(long, value_parser = parse_n)]
        n: usize,
    },
    /// Exact target statistics of the noisy GHZ experiment.
    Target(Scenario),
    /// Compare a model file against the target; exit 1 when out of tolerance.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        scenario: Scenario,
        /// Maximum allowed per-entry deviation.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Critical detection efficiency at fixed visibility.
    Threshold {
        #[arg(long, value_parser = parse_n)]
        n: usize,
        #[arg(long, value_parser = parse_unit, default_value = "1")]
        v: Rational,
        #[arg(long, value_parser = parse_mode, default_value = "full")]
        mode: Mode,
        /// Bisection width in η.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Maximal visibility along a grid of efficiencies.
    Tradeoff {
        #[arg(long, value_parser = parse_n)]
        n: usize,
        /// `start:stop:step` or a comma-separated list, within [1/2, 1].
        #[arg(long, default_value = "1/2:1:1/20")]
        grid: String,
        #[arg(long, value_parser = parse_mode, default_value = "full")]
        mode: Mode,
    },
    /// Completed reference model at η = n/(2n-2).
    Fixture {
        #[arg(long, value_parser = clap::value_parser!(u32).range(3..=5))]
        n: u32,
    },
    /// Monte Carlo run with per-cell comparison against exact statistics.
    Simulate {
        #[arg(long, value_enum, default_value_t = SourceKind::Quantum)]
        source: SourceKind,
        #[arg(long, value_parser = parse_n)]
        n: Option<usize>,
        #[arg(long, value_parser = parse_unit)]
        eta: Option<Rational>,
        #[arg(long, value_parser = parse_unit)]
        v: Option<Rational>,
        /// Model file for `--source lhv`.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SourceKind {
    Quantum,
    Lhv,
}

#[derive(Debug, Args)]
pub struct Scenario {
    #[arg(long, value_parser = parse_n)]
    pub n: usize,
    #[arg(long, value_parser = parse_unit)]
    pub eta: Rational,
    #[arg(long, value_parser = parse_unit)]
    pub v: Rational,
}

fn parse_n(text: &str) -> Result<usize, String> {
    let n: usize = text.parse().map_err(|e| format!("{e}"))?;
    if n < 3 {
        return Err("n must be at least 3".into());
    }
    Ok(n)
}

fn parse_unit(text: &str) -> Result<Rational, String> {
    let r = parse_rational(text).map_err(|e| e.to_string())?;
    if r < Rational::from_integer(0.into()) || r > Rational::from_integer(1.into()) {
        return Err(format!("{text} is outside [0, 1]"));
    }
    Ok(r)
}

fn parse_mode(text: &str) -> Result<Mode, String> {
    text.parse().map_err(|e: mermin_lhv::Error| e.to_string())
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
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads as usize)
        .build_global()
    {
        log::warn!("thread pool: {e}");
    }
    match commands::execute(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {:#}", e.source);
            ExitCode::from(e.code)
        }
    }
}
