use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use infsum::catalog::{lookup, Params, REFERENCE_TERMS};
use infsum::MACHINE_EPSILON;
use infsum_stats::experiments::{
    accuracy_suite, comp_grid, iteration_grid, negbin_marginal_grid, poisson_factorial_grid, success_rates,
    MethodChoice, SUITE_EPSILONS, SUITE_METHODS,
};

use crate::config::{self, pick, BenchConfig};
use crate::error::{usage, Result};
use crate::output::{emit, num, Table};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// comp-table (COMP iteration counts), poisson-fact or negbin (accuracy suites).
    #[arg(long)]
    pub preset: Option<String>,
    /// iterations or accuracy.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub series: Option<String>,
    /// Comma-separated method labels, e.g. `threshold_relaxed,ebp,batches_20,cap_1000`.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub max_terms: Option<usize>,
    /// Length of the long fixed cap used as the accuracy reference.
    #[arg(long)]
    pub reference_terms: Option<usize>,
    /// Split success rates at L = 1/2.
    #[arg(long)]
    pub stratify: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Row CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Success-rate CSV (accuracy runs only).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

struct Plan {
    kind: String,
    series: String,
    grid: Vec<Params>,
    methods: Vec<MethodChoice>,
    eps: Vec<f64>,
    stratify: bool,
}

fn preset(name: &str) -> Result<Plan> {
    let names = |v: &[MethodChoice]| v.to_vec();
    Ok(match name {
        "comp-table" => Plan {
            kind: "iterations".into(),
            series: "comp_reparam".into(),
            grid: comp_grid(),
            methods: names(&[MethodChoice::Threshold { strict: false }, MethodChoice::ErrorBoundingPairs]),
            eps: vec![1e6 * MACHINE_EPSILON, MACHINE_EPSILON],
            stratify: false,
        },
        "poisson-fact" => Plan {
            kind: "accuracy".into(),
            series: "poisson_fact_moment".into(),
            grid: poisson_factorial_grid(),
            methods: names(&SUITE_METHODS),
            eps: SUITE_EPSILONS.to_vec(),
            stratify: false,
        },
        "negbin" => Plan {
            kind: "accuracy".into(),
            series: "negbin_marginal".into(),
            grid: negbin_marginal_grid(),
            methods: names(&SUITE_METHODS),
            eps: SUITE_EPSILONS.to_vec(),
            stratify: true,
        },
        _ => return usage(format!("unknown preset `{name}` (comp-table, poisson-fact, negbin)")),
    })
}

pub fn run(a: BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let file: BenchConfig = config::load(a.config.as_deref())?;
    let base = match a.preset.clone().or(file.preset.clone()) {
        Some(p) => Some(preset(&p)?),
        None => None,
    };
    let series = match a.series.or(file.series).or(base.as_ref().map(|b| b.series.clone())) {
        Some(s) => s,
        None => return usage("bench needs --series or --preset"),
    };
    let entry = lookup(&series)?;
    let grid: Vec<Params> = match (file.grid, &base) {
        (Some(g), _) => g.iter().map(|m| m.iter().map(|(k, v)| (k.as_str(), *v)).collect()).collect(),
        (None, Some(b)) if b.series == series => b.grid.clone(),
        _ => vec![Params::new()],
    };
    // reject bad grids before any work is done
    for p in &grid {
        entry.resolve(p)?;
    }
    let methods: Vec<MethodChoice> = match a.methods.or(file.methods) {
        Some(v) => v.iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>()?,
        None => base.as_ref().map(|b| b.methods.clone()).unwrap_or_else(|| vec![MethodChoice::Auto]),
    };
    let eps = pick(a.eps, file.eps, base.as_ref().map(|b| b.eps.clone()).unwrap_or_else(|| vec![MACHINE_EPSILON]));
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return usage("tolerances must be positive and finite");
    }
    let kind = pick(a.kind, file.kind, base.as_ref().map(|b| b.kind.clone()).unwrap_or_else(|| "iterations".into()));
    let max_terms = pick(a.max_terms, file.max_terms, 1_000_000);
    let reference_terms = pick(a.reference_terms, file.reference_terms, REFERENCE_TERMS);
    let stratify = a.stratify || file.stratify.or(base.as_ref().map(|b| b.stratify)).unwrap_or(false);
    let out_path = a.out.or(file.out);
    let summary_path = a.summary.or(file.summary);

    match kind.as_str() {
        "iterations" => {
            let rows = iteration_grid(&series, &grid, &methods, &eps, max_terms)?;
            let mut t = Table::new(vec!["series", "params", "method", "epsilon", "n_evaluations", "log_sum", "converged"]);
            for r in rows {
                t.push(vec![
                    r.series,
                    r.params,
                    r.method,
                    num(r.epsilon),
                    r.n_evaluations.to_string(),
                    num(r.log_sum),
                    r.converged.to_string(),
                ]);
            }
            emit(out_path.as_deref(), &t.to_csv(), out)?;
        }
        "accuracy" => {
            if entry.closed_form(&grid[0])?.is_none() {
                return usage(format!("series `{series}` has no closed form at these parameters"));
            }
            let rows = accuracy_suite(&series, &grid, &eps, &methods, reference_terms)?;
            let mut t = Table::new(vec![
                "series",
                "params",
                "epsilon",
                "method",
                "ratio_limit",
                "n_evaluations",
                "log_sum",
                "log_exact",
                "abs_error",
                "ref_error",
                "hit_eps",
                "beat_ref",
                "either",
                "error",
            ]);
            for r in &rows {
                t.push(vec![
                    r.series.clone(),
                    r.params.clone(),
                    num(r.epsilon),
                    r.method.clone(),
                    num(r.ratio_limit),
                    r.n_evaluations.to_string(),
                    num(r.log_sum),
                    num(r.log_exact),
                    num(r.abs_error),
                    num(r.ref_error),
                    r.hit_eps.to_string(),
                    r.beat_ref.to_string(),
                    r.either.to_string(),
                    r.error.clone().unwrap_or_default(),
                ]);
            }
            emit(out_path.as_deref(), &t.to_csv(), out)?;
            let mut s = Table::new(vec!["method", "high_l", "n", "hit_eps", "beat_ref", "either"]);
            for r in success_rates(&rows, stratify) {
                s.push(vec![
                    r.method,
                    r.high_l.map(|b| b.to_string()).unwrap_or_default(),
                    r.n.to_string(),
                    num(r.hit_eps),
                    num(r.beat_ref),
                    num(r.either),
                ]);
            }
            match summary_path {
                Some(p) => emit(Some(&p), &s.to_csv(), out)?,
                // rows already went to stdout: keep it a single table
                None if out_path.is_none() => {}
                None => emit(None, &s.to_csv(), out)?,
            }
        }
        k => return usage(format!("unknown bench kind `{k}` (iterations, accuracy)")),
    }
    Ok(0)
}
