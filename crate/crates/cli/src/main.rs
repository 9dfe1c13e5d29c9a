mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sideband_core::Error;

#[derive(Parser)]
#[command(name = "sideband", version, about = "Sideband-filtered nuclear resonant scattering: simulate, recover, compare")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Phantasy,
    Doppler,
}

impl From<MethodArg> for sideband_core::recovery::Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Phantasy => Self::Phantasy,
            MethodArg::Doppler => Self::Doppler,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the detector intensity grid for a configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed for event sampling (only used when [output] events = true).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recover amplitude and phase from a simulated grid (grid.json).
    Recover {
        grid: PathBuf,
        #[arg(long, value_enum, default_value = "phantasy")]
        method: MethodArg,
        #[arg(long, default_value_t = 15.0)]
        t1: f64,
        #[arg(long, default_value_t = 110.0)]
        t2: f64,
        #[arg(long)]
        out: PathBuf,
        /// Optional configuration whose [filter] and [output] sections apply.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Doppler-drive baseline for a configuration.
    Baseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 117.0)]
        t1: f64,
        #[arg(long, default_value_t = 192.0)]
        t2: f64,
        /// Analyzer thicknesses (µm) to search; the best one is used.
        #[arg(long, value_delimiter = ',')]
        thickness: Vec<f64>,
    },
    /// Error over a grid of integration windows.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "phantasy")]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
        /// t₁ values in ns, comma separated (default 15, 20, …, 60).
        #[arg(long, value_delimiter = ',')]
        t1: Vec<f64>,
        /// t₂ values in ns, comma separated (default 70, 80, …, 190).
        #[arg(long, value_delimiter = ',')]
        t2: Vec<f64>,
    },
    /// Run the invariant suite.
    Selftest {
        /// Check this grid (grid.json) instead of a freshly simulated one.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
}

/// Exit codes: 1 invariant failure, 2 configuration or input error, 3 data mismatch, 4 contract violation.
pub enum Failure {
    Invariant(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Core(Error::GridMismatch(_)) => 3,
            Failure::Core(Error::Contract(_)) => 4,
            Failure::Core(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(&config, &out, seed),
        Command::Recover { grid, method, t1, t2, out, config } => commands::recover(&grid, method.into(), t1, t2, &out, config.as_deref()),
        Command::Baseline { config, out, t1, t2, thickness } => commands::baseline(&config, &out, t1, t2, &thickness),
        Command::Sweep { config, method, out, t1, t2 } => commands::sweep(&config, method.into(), &out, &t1, &t2),
        Command::Selftest { grid } => commands::selftest(grid.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invariant(name) => eprintln!("selftest failed: {name}"),
                Failure::Core(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}
