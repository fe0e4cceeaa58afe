use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use infsum::min_batch_size;

use crate::error::{usage, Result};
use crate::output::{emit, num, Table};

#[derive(Debug, Args)]
pub struct BatchsizeArgs {
    /// Comma-separated ratio limits in [0, 1).
    #[arg(long = "l", value_delimiter = ',')]
    pub limits: Vec<f64>,
    /// Evenly spaced L values from 0 up to --to (exclusive of 1).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 0.99)]
    pub to: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: BatchsizeArgs, out: &mut dyn Write) -> Result<i32> {
    let mut ls = a.limits.clone();
    if let Some(n) = a.steps {
        if n < 2 {
            return usage("--steps needs at least 2 points");
        }
        ls.extend((0..n).map(|i| a.to * i as f64 / (n - 1) as f64));
    }
    if ls.is_empty() {
        return usage("give --l values or --steps");
    }
    let mut t = Table::new(vec!["L", "min_batch_size"]);
    for l in ls {
        if !(0.0..1.0).contains(&l) {
            return usage(format!("ratio limit L={l} unsupported: batch sizes exist only for 0 <= L < 1"));
        }
        t.push(vec![num(l), min_batch_size(l)?.to_string()]);
    }
    emit(a.out.as_deref(), &t.to_csv(), out)?;
    Ok(0)
}
