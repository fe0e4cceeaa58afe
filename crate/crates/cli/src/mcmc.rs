use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use infsum_stats::diagnostics::ParamSummary;
use infsum_stats::mcmc::{comp_noisy_metropolis, CompPosteriorConfig, GammaPrior};

use crate::config::{self, pick, McmcConfig};
use crate::error::{usage, Result};
use crate::input::read_counts;
use crate::output::{emit, json_string, num, Table};
use crate::sum::parse_method;

#[derive(Debug, Args)]
pub struct McmcArgs {
    /// Single-column CSV of non-negative integer counts.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Gamma prior on mu as SHAPE,RATE.
    #[arg(long, value_parser = parse_pair)]
    pub prior_mu: Option<(f64, f64)>,
    /// Gamma prior on nu as SHAPE,RATE.
    #[arg(long, value_parser = parse_pair)]
    pub prior_nu: Option<(f64, f64)>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Truncation method for the normalising constant.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Proposal standard deviations on (ln mu, ln nu) as A,B.
    #[arg(long, value_parser = parse_pair)]
    pub scales: Option<(f64, f64)>,
    /// Keep the proposal scales fixed during warmup.
    #[arg(long)]
    pub no_adapt: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Starting (mu, nu) as MU,NU.
    #[arg(long, value_parser = parse_pair)]
    pub init: Option<(f64, f64)>,
    /// Draws CSV (`chain,iter,mu,nu,trunc_n`).
    #[arg(long)]
    pub draws: Option<PathBuf>,
    /// Summary JSON file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Print the summary JSON instead of the table.
    #[arg(long)]
    pub json: bool,
}

pub fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B, got `{s}`"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    Ok((p(a)?, p(b)?))
}

fn row(name: &str, p: &ParamSummary) -> Vec<String> {
    vec![
        name.to_string(),
        num(p.mean),
        num(p.median),
        num(p.sd),
        num(p.ci_low),
        num(p.ci_high),
        num(p.mcse),
        num(p.ess),
        num(p.rhat),
    ]
}

pub fn run(a: McmcArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let file: McmcConfig = config::load(a.config.as_deref())?;
    let Some(data) = a.data.or(file.data) else {
        return usage("mcmc needs --data");
    };
    let counts = read_counts(&data)?;
    let d = CompPosteriorConfig::default();
    let prior = |p: Option<(f64, f64)>, dflt: GammaPrior| -> Result<GammaPrior> {
        match p {
            Some((shape, rate)) => Ok(GammaPrior::new(shape, rate)?),
            None => Ok(dflt),
        }
    };
    let cfg = CompPosteriorConfig {
        prior_mu: prior(a.prior_mu.or(file.prior_mu), d.prior_mu)?,
        prior_nu: prior(a.prior_nu.or(file.prior_nu), d.prior_nu)?,
        epsilon: pick(a.eps, file.eps, d.epsilon),
        method: match a.method.or(file.method) {
            Some(m) => parse_method(&m)?,
            None => d.method,
        },
        max_terms: pick(a.max_terms, file.max_terms, d.max_terms),
        n_chains: pick(a.chains, file.chains, d.n_chains),
        n_warmup: pick(a.warmup, file.warmup, d.n_warmup),
        n_samples: pick(a.samples, file.samples, d.n_samples),
        proposal_scales: pick(a.scales, file.scales, d.proposal_scales),
        adapt: !a.no_adapt && file.adapt.unwrap_or(d.adapt),
        seed: pick(a.seed, file.seed, d.seed),
        init: a.init.or(file.init),
        ..d
    };
    let res = comp_noisy_metropolis(&counts, &cfg)?;
    for w in &res.summary.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    if let Some(p) = a.draws.or(file.draws) {
        let mut t = Table::new(vec!["chain", "iter", "mu", "nu", "trunc_n"]);
        for d in &res.draws {
            t.push(vec![d.chain.to_string(), d.iter.to_string(), num(d.mu), num(d.nu), d.trunc_n.to_string()]);
        }
        emit(Some(&p), &t.to_csv(), out)?;
    }
    let json = json_string(&res.summary);
    if let Some(p) = a.summary.or(file.summary) {
        emit(Some(&p), &json, out)?;
    }
    if a.json {
        emit(None, &json, out)?;
    } else {
        let mut t = Table::new(vec!["param", "mean", "median", "sd", "q2.5", "q97.5", "mcse", "ess", "rhat"]);
        t.push(row("mu", &res.summary.mu));
        t.push(row("nu", &res.summary.nu));
        let (lo, hi) = res.summary.truncation_n_interval;
        let mut text = t.to_csv();
        text.push_str(&format!(
            "# truncation n: median {}, 95% interval [{}, {}]; {} draws\n",
            num(res.summary.median_truncation_n),
            num(lo),
            num(hi),
            res.summary.n_draws
        ));
        emit(None, &text, out)?;
    }
    Ok(0)
}
