use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use infsum::catalog::{entries, lookup, Params};
use infsum::{min_batch_size, truncate, Method, TruncationConfig, MACHINE_EPSILON};
use serde::Serialize;

use crate::config::{self, pick, SumConfig};
use crate::error::{usage, CliError, Result};
use crate::output::{emit, json_string, num, opt_num};

#[derive(Debug, Args)]
pub struct SumArgs {
    /// Catalog series id (see --list).
    pub series: Option<String>,
    /// Series parameter; `--mu 10` is shorthand for `--param mu=10`.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// threshold, ebp, batches, fixed or auto.
    #[arg(long)]
    pub method: Option<String>,
    /// Absolute tolerance (default: machine epsilon).
    #[arg(long)]
    pub eps: Option<f64>,
    /// M of the threshold rule.
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_terms: Option<usize>,
    /// Fixed cap K: terms 0..=K are summed.
    #[arg(long)]
    pub cap_k: Option<usize>,
    /// Plain threshold rule without the ratio check or L/M validation.
    #[arg(long)]
    pub relaxed: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    /// Print the catalog and exit.
    #[arg(long)]
    pub list: bool,
}

const SUM_FLAGS: &[&str] =
    &["param", "method", "eps", "m", "batch-size", "max-terms", "cap-k", "relaxed", "config", "json", "list", "help"];

/// Turns `sum <id> --mu 10` into `sum <id> --param mu=10` for every flag the
/// `sum` command does not itself define.
pub fn rewrite_series_flags(args: Vec<OsString>) -> Vec<OsString> {
    if args.get(1).and_then(|a| a.to_str()) != Some("sum") {
        return args;
    }
    let mut out: Vec<OsString> = args[..2].to_vec();
    let mut it = args.into_iter().skip(2);
    while let Some(a) = it.next() {
        let Some(flag) = a.to_str().and_then(|s| s.strip_prefix("--")).map(str::to_owned) else {
            out.push(a);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_owned(), Some(v.to_owned())),
            None => (flag.clone(), None),
        };
        if name.is_empty() || SUM_FLAGS.contains(&name.as_str()) {
            out.push(a);
            continue;
        }
        let value = match inline {
            Some(v) => Some(v),
            None => it.next().and_then(|v| v.into_string().ok()),
        };
        out.push("--param".into());
        out.push(format!("{name}={}", value.unwrap_or_default()).into());
    }
    out
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("parameter `{k}` needs a number, got `{v}`"))?;
    Ok((k.trim().to_owned(), v))
}

pub fn parse_method(s: &str) -> Result<Method> {
    Ok(match s {
        "threshold" => Method::SumToThreshold,
        "ebp" => Method::ErrorBoundingPairs,
        "batches" => Method::Batches,
        "fixed" => Method::FixedCap,
        "auto" => Method::Auto,
        _ => return usage(format!("unknown method `{s}` (threshold, ebp, batches, fixed, auto)")),
    })
}

#[derive(Serialize)]
struct SumOutput<'a> {
    series: &'a str,
    params: BTreeMap<&'a str, f64>,
    method: &'a str,
    method_used: &'a str,
    epsilon: f64,
    log_sum: f64,
    sum: f64,
    n_evaluations: usize,
    converged: bool,
    final_ratio: f64,
    bound_halfwidth: Option<f64>,
    batch_size: Option<usize>,
}

fn list(out: &mut dyn Write) -> Result<i32> {
    let mut text = String::new();
    for e in entries() {
        let ps: Vec<String> = e
            .params
            .iter()
            .map(|p| match p.default {
                Some(d) => format!("{}={d}", p.name),
                None => p.name.to_string(),
            })
            .collect();
        text.push_str(&format!("{:<24} {:<28} {}\n", e.id, ps.join(" "), e.description));
    }
    emit(None, &text, out)?;
    Ok(0)
}

pub fn run(a: SumArgs, out: &mut dyn Write) -> Result<i32> {
    if a.list {
        return list(out);
    }
    let file: SumConfig = config::load(a.config.as_deref())?;
    let Some(series) = a.series.or(file.series) else {
        return usage("no series given (try `infsum sum --list`)");
    };
    let entry = lookup(&series)?;
    let mut params = Params::new();
    for (k, v) in file.params.iter().map(|(k, v)| (k.as_str(), *v)).chain(a.params.iter().map(|(k, v)| (k.as_str(), *v))) {
        params.insert(k, v);
    }
    let resolved = entry.resolve(&params)?;
    let spec = entry.spec(&resolved)?;
    let method_name = pick(a.method, file.method, "auto".to_string());
    let method = parse_method(&method_name)?;
    let mut cfg = TruncationConfig::new(method, pick(a.eps, file.eps, MACHINE_EPSILON));
    cfg.threshold_m = pick(a.m, file.m, cfg.threshold_m);
    cfg.max_terms = pick(a.max_terms, file.max_terms, 1_000_000);
    cfg.cap_k = pick(a.cap_k, file.cap_k, cfg.cap_k);
    cfg.strict = !(a.relaxed || file.relaxed.unwrap_or(false));
    cfg.batch_size = match (a.batch_size.or(file.batch_size), spec.ratio_limit) {
        (Some(n), _) => n,
        (None, Some(l)) if l < 1.0 && method == Method::Batches => min_batch_size(l)?,
        _ => cfg.batch_size,
    };
    let r = truncate(&spec, &cfg)?;
    let report = SumOutput {
        series: entry.id,
        params: resolved.iter().collect(),
        method: &method_name,
        method_used: r.method_used.as_str(),
        epsilon: cfg.epsilon,
        log_sum: r.log_sum.ln(),
        sum: r.sum(),
        n_evaluations: r.n_evaluations,
        converged: r.converged,
        final_ratio: r.final_ratio,
        bound_halfwidth: r.bound_halfwidth.map(|h| h.exp()),
        batch_size: r.batch_size,
    };
    let text = if a.json {
        json_string(&report)
    } else {
        let params: Vec<String> = report.params.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect();
        let mut t = String::new();
        t.push_str(&format!("series          {}\n", report.series));
        t.push_str(&format!("params          {}\n", params.join(" ")));
        t.push_str(&format!("method          {} ({})\n", report.method, report.method_used));
        t.push_str(&format!("epsilon         {}\n", num(report.epsilon)));
        t.push_str(&format!("log_sum         {}\n", num(report.log_sum)));
        t.push_str(&format!("sum             {}\n", num(report.sum)));
        t.push_str(&format!("n_evaluations   {}\n", report.n_evaluations));
        t.push_str(&format!("converged       {}\n", report.converged));
        t.push_str(&format!("final_ratio     {}\n", num(report.final_ratio)));
        if report.bound_halfwidth.is_some() {
            t.push_str(&format!("bound_halfwidth {}\n", opt_num(report.bound_halfwidth)));
        }
        if let Some(n) = report.batch_size {
            t.push_str(&format!("batch_size      {n}\n"));
        }
        t
    };
    emit(None, &text, out)?;
    if r.converged {
        Ok(0)
    } else {
        Err(CliError::CapOut(format!(
            "no convergence within {} term evaluations (last index {})",
            r.n_evaluations, r.last_index
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn series_flags_become_params() {
        let got = rewrite_series_flags(os(&["infsum", "sum", "comp", "--mu", "10", "--nu=0.5", "--eps", "1e-10", "--json"]));
        assert_eq!(
            got,
            os(&["infsum", "sum", "comp", "--param", "mu=10", "--param", "nu=0.5", "--eps", "1e-10", "--json"])
        );
    }

    #[test]
    fn other_commands_untouched() {
        let a = os(&["infsum", "bench", "--mu", "3"]);
        assert_eq!(rewrite_series_flags(a.clone()), a);
    }

    #[test]
    fn param_syntax() {
        assert_eq!(parse_param("mu=2.5").unwrap(), ("mu".to_string(), 2.5));
        assert!(parse_param("mu").is_err());
        assert!(parse_param("mu=x").is_err());
    }
}
