//! The `infsum` command-line tool: single sums, benchmark grids, batch-size
//! curves, and the COMP-MCMC and Erlang-MMLE drivers.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

mod batchsize;
mod bench;
pub mod config;
pub mod error;
pub mod input;
mod mcmc;
mod mmle;
pub mod output;
mod sum;

pub use error::{CliError, Result};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "INFSUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "infsum", version, about = "Error-controlled truncation of infinite series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truncate one catalog series.
    Sum(sum::SumArgs),
    /// Iteration-count and accuracy grids, written as CSV.
    Bench(bench::BenchArgs),
    /// Smallest safe batch size for each ratio limit L.
    Batchsize(batchsize::BatchsizeArgs),
    /// Noisy Metropolis for the COMP model.
    Mcmc(mcmc::McmcArgs),
    /// Maximum marginal likelihood for the Erlang queueing model.
    Mmle(mmle::MmleArgs),
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 usage/config/input error, 2 cap-out.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = sum::rewrite_series_flags(args.into_iter().map(Into::into).collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = init_threads().and_then(|_| match cli.command {
        Command::Sum(a) => sum::run(a, stdout),
        Command::Bench(a) => bench::run(a, stdout),
        Command::Batchsize(a) => batchsize::run(a, stdout),
        Command::Mcmc(a) => mcmc::run(a, stdout, stderr),
        Command::Mmle(a) => mmle::run(a, stdout),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
