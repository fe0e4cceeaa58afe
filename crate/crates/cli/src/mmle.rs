use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use infsum_stats::erlang::{erlang_mmle, mmle_study, ErlangOptions, ErlangTruncation, Interval, MmleOptions, Representation};

use crate::config::{self, pick, MmleConfig};
use crate::error::{usage, Result};
use crate::input::read_positive_reals;
use crate::mcmc::parse_pair;
use crate::output::{emit, json_string, num, opt_num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Fit one data set.
    Single,
    /// Repeated fits to simulated data.
    Simulate,
}

#[derive(Debug, Args)]
pub struct MmleArgs {
    pub mode: Mode,
    /// Single-column CSV of positive totals (single mode).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// True mu (simulate mode).
    #[arg(long)]
    pub mu: Option<f64>,
    /// True beta (simulate mode).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Observations per data set.
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// full or bessel.
    #[arg(long)]
    pub representation: Option<String>,
    /// adaptive, fixed:K, or (simulate only) both:K.
    #[arg(long)]
    pub truncation: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_terms: Option<usize>,
    /// Also compute intervals from a finite-difference Hessian.
    #[arg(long)]
    pub numerical_hessian: bool,
    /// Starting (mu, beta) as MU,BETA.
    #[arg(long, value_parser = parse_pair)]
    pub init: Option<(f64, f64)>,
    /// Result JSON (single) or per-replicate CSV (simulate).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Study summary CSV (simulate; default stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn representation(s: &str) -> Result<Representation> {
    match s {
        "full" => Ok(Representation::Full),
        "bessel" => Ok(Representation::Bessel),
        _ => usage(format!("unknown representation `{s}` (full, bessel)")),
    }
}

fn truncations(s: &str, allow_both: bool) -> Result<Vec<ErlangTruncation>> {
    let cap = |k: &str| -> Result<usize> {
        match k.parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => usage(format!("bad term count `{k}` in truncation `{s}`")),
        }
    };
    if s == "adaptive" {
        return Ok(vec![ErlangTruncation::Adaptive]);
    }
    if let Some(k) = s.strip_prefix("fixed:") {
        return Ok(vec![ErlangTruncation::Fixed(cap(k)?)]);
    }
    if let Some(k) = s.strip_prefix("both:").filter(|_| allow_both) {
        return Ok(vec![ErlangTruncation::Fixed(cap(k)?), ErlangTruncation::Adaptive]);
    }
    usage(format!("unknown truncation `{s}` (adaptive, fixed:K{})", if allow_both { ", both:K" } else { "" }))
}

fn label(t: ErlangTruncation) -> String {
    match t {
        ErlangTruncation::Adaptive => "adaptive".into(),
        ErlangTruncation::Fixed(k) => format!("fixed:{k}"),
    }
}

fn ci(c: Option<Interval>) -> [String; 2] {
    [opt_num(c.map(|i| i.lower)), opt_num(c.map(|i| i.upper))]
}

pub fn run(a: MmleArgs, out: &mut dyn Write) -> Result<i32> {
    let file: MmleConfig = config::load(a.config.as_deref())?;
    let rep = representation(&pick(a.representation, file.representation, "full".into()))?;
    let d = ErlangOptions::default();
    let options = |t: ErlangTruncation| MmleOptions {
        loglik: ErlangOptions {
            representation: rep,
            truncation: t,
            epsilon: pick(a.eps, file.eps, d.epsilon),
            max_terms: pick(a.max_terms, file.max_terms, d.max_terms),
        },
        init: a.init.or(file.init),
        numerical_hessian: a.numerical_hessian || file.numerical_hessian.unwrap_or(false),
        ..MmleOptions::default()
    };
    let out_path = a.out.or(file.out);
    match a.mode {
        Mode::Single => {
            let Some(data) = a.data.or(file.data) else {
                return usage("mmle single needs --data");
            };
            let trunc = truncations(&pick(a.truncation, file.truncation, "adaptive".into()), false)?[0];
            let x = read_positive_reals(&data)?;
            let fit = erlang_mmle(&x, &options(trunc))?;
            emit(out_path.as_deref(), &json_string(&fit), out)?;
        }
        Mode::Simulate => {
            let (Some(mu), Some(beta)) = (a.mu.or(file.mu), a.beta.or(file.beta)) else {
                return usage("mmle simulate needs --mu and --beta");
            };
            let j = pick(a.j, file.j, 50);
            let reps = pick(a.reps, file.reps, 100);
            let seed = pick(a.seed, file.seed, 1);
            let plan = truncations(&pick(a.truncation, file.truncation, "both:1000".into()), true)?;
            let mut fits = Table::new(vec![
                "truncation",
                "replicate",
                "mu_hat",
                "beta_hat",
                "mu_low",
                "mu_high",
                "beta_low",
                "beta_high",
                "mu_low_fd",
                "mu_high_fd",
                "beta_low_fd",
                "beta_high_fd",
                "n_optimizer_evals",
                "error",
            ]);
            let mut summary = Table::new(vec![
                "truncation",
                "mu",
                "beta",
                "j",
                "n_ok",
                "n_failed",
                "rmse_mu",
                "rmse_beta",
                "coverage_mu",
                "coverage_beta",
                "coverage_mu_fd",
                "coverage_beta_fd",
            ]);
            for t in plan {
                let (rows, s) = mmle_study(mu, beta, j, reps, seed, &options(t))?;
                for r in rows {
                    let [ml, mh] = ci(r.ci_mu);
                    let [bl, bh] = ci(r.ci_beta);
                    let [mlf, mhf] = ci(r.ci_mu_fd);
                    let [blf, bhf] = ci(r.ci_beta_fd);
                    fits.push(vec![
                        label(t),
                        r.replicate.to_string(),
                        num(r.mu_hat),
                        num(r.beta_hat),
                        ml,
                        mh,
                        bl,
                        bh,
                        mlf,
                        mhf,
                        blf,
                        bhf,
                        r.n_optimizer_evals.to_string(),
                        r.error.unwrap_or_default(),
                    ]);
                }
                summary.push(vec![
                    label(t),
                    num(s.mu),
                    num(s.beta),
                    s.j.to_string(),
                    s.n_ok.to_string(),
                    s.n_failed.to_string(),
                    num(s.rmse_mu),
                    num(s.rmse_beta),
                    num(s.coverage_mu),
                    num(s.coverage_beta),
                    opt_num(s.coverage_mu_fd),
                    opt_num(s.coverage_beta_fd),
                ]);
            }
            if let Some(p) = out_path {
                emit(Some(&p), &fits.to_csv(), out)?;
            }
            emit(a.summary.or(file.summary).as_deref(), &summary.to_csv(), out)?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_specs() {
        assert_eq!(truncations("adaptive", false).unwrap(), vec![ErlangTruncation::Adaptive]);
        assert_eq!(truncations("fixed:1000", false).unwrap(), vec![ErlangTruncation::Fixed(1000)]);
        assert_eq!(truncations("both:5", true).unwrap().len(), 2);
        assert!(truncations("both:5", false).is_err());
        assert!(truncations("fixed:0", false).is_err());
        assert!(truncations("sometimes", true).is_err());
    }
}
