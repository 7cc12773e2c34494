//! Experiment runner and verification front-end for `geoprox`.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod sweep;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{CliError, EXIT_CONFIG};
use crate::sweep::SweepParam;
use crate::verify::Suite;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "GEOPROX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "geoprox", version, about = "Proximal point experiments on spheres")]
pub struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Suppress progress output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment; writes a trace CSV and a summary JSON.
    Run { config: PathBuf },
    /// Run a randomized property suite; writes verify_<suite>.json.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Repeat an experiment over parameter values, in parallel.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
    },
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = thread_pool().and_then(|pool| {
        pool.install(|| match &cli.command {
            Command::Run { config } => run::cmd_run(config, &cli.output_dir, cli.quiet),
            Command::Verify { suite, trials, seed } => {
                verify::cmd_verify(*suite, *trials, *seed, &cli.output_dir, cli.quiet)
            }
            Command::Sweep { config, param, values } => {
                sweep::cmd_sweep(config, *param, values, &cli.output_dir, cli.quiet)
            }
        })
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and executes them.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                0
            }
        }
    }
}
