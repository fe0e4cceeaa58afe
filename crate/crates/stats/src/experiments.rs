//! Benchmark grids: iteration counts for COMP and power-geometric series, and
//! accuracy suites against closed forms.

use std::fmt;

use infsum::catalog::{lookup, reference_sum, CatalogEntry, Params, REFERENCE_TERMS};
use infsum::{
    fixed_cap, log_diff, min_batch_size, truncate, LogValue, Method, SeriesSpec, TruncationConfig, TruncationResult,
    MACHINE_EPSILON,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{arg, Result};

/// A truncation method with the settings the grids use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MethodChoice {
    /// Stop once a term is below the level; `strict` also requires the
    /// ratio test and rejects `L >= M`.
    Threshold { strict: bool },
    ErrorBoundingPairs,
    /// Fixed batch size, or the smallest safe one for the series' `L`.
    Batches { size: Option<usize> },
    /// Exactly this many terms.
    Cap(usize),
    Auto,
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodChoice::Threshold { strict: true } => write!(f, "threshold"),
            MethodChoice::Threshold { strict: false } => write!(f, "threshold_relaxed"),
            MethodChoice::ErrorBoundingPairs => write!(f, "ebp"),
            MethodChoice::Batches { size: None } => write!(f, "batches"),
            MethodChoice::Batches { size: Some(n) } => write!(f, "batches_{n}"),
            MethodChoice::Cap(k) => write!(f, "cap_{k}"),
            MethodChoice::Auto => write!(f, "auto"),
        }
    }
}

impl std::str::FromStr for MethodChoice {
    type Err = crate::StatsError;

    /// Inverse of `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| crate::StatsError::Argument(format!("bad number in method `{s}`")))
        };
        Ok(match s {
            "threshold" => MethodChoice::Threshold { strict: true },
            "threshold_relaxed" => MethodChoice::Threshold { strict: false },
            "ebp" => MethodChoice::ErrorBoundingPairs,
            "batches" => MethodChoice::Batches { size: None },
            "auto" => MethodChoice::Auto,
            _ => {
                if let Some(n) = s.strip_prefix("batches_") {
                    MethodChoice::Batches { size: Some(num(n)?) }
                } else if let Some(k) = s.strip_prefix("cap_") {
                    MethodChoice::Cap(num(k)?)
                } else {
                    return arg(format!(
                        "unknown method `{s}` (threshold, threshold_relaxed, ebp, batches, batches_N, cap_K, auto)"
                    ));
                }
            }
        })
    }
}

/// The five methods compared in the accuracy suites.
pub const SUITE_METHODS: [MethodChoice; 5] = [
    MethodChoice::Batches { size: None },
    MethodChoice::ErrorBoundingPairs,
    MethodChoice::Threshold { strict: false },
    MethodChoice::Cap(1000),
    MethodChoice::Cap(REFERENCE_TERMS),
];

/// `2.2e-16`, `2.2e-15` and `2.2e-12` as multiples of the machine epsilon.
pub const SUITE_EPSILONS: [f64; 3] = [MACHINE_EPSILON, 10.0 * MACHINE_EPSILON, 1e4 * MACHINE_EPSILON];

pub fn run_method(series: &SeriesSpec, method: MethodChoice, epsilon: f64, max_terms: usize) -> Result<TruncationResult> {
    let base = TruncationConfig::new(Method::Auto, epsilon).with_max_terms(max_terms);
    let r = match method {
        MethodChoice::Threshold { strict } => {
            truncate(series, &TruncationConfig { method: Method::SumToThreshold, strict, ..base })?
        }
        MethodChoice::ErrorBoundingPairs => truncate(series, &TruncationConfig { method: Method::ErrorBoundingPairs, ..base })?,
        MethodChoice::Batches { size } => {
            let n = match (size, series.ratio_limit) {
                (Some(n), _) => n,
                (None, Some(l)) => min_batch_size(l)?,
                (None, None) => infsum::truncation::UNKNOWN_LIMIT_BATCH_SIZE,
            };
            truncate(series, &TruncationConfig { method: Method::Batches, batch_size: n, ..base })?
        }
        MethodChoice::Cap(k) => {
            if k == 0 {
                return arg("a cap needs at least one term");
            }
            fixed_cap(series, k - 1)?
        }
        MethodChoice::Auto => truncate(series, &base)?,
    };
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub series: String,
    pub params: String,
    pub method: String,
    pub epsilon: f64,
    pub n_evaluations: usize,
    pub log_sum: f64,
    pub converged: bool,
}

fn params_label(p: &Params) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// Iteration counts for one series under several methods and tolerances.
pub fn iteration_grid(
    series_id: &str,
    grid: &[Params],
    methods: &[MethodChoice],
    epsilons: &[f64],
    max_terms: usize,
) -> Result<Vec<IterationRow>> {
    let entry = lookup(series_id)?;
    let mut cells = Vec::new();
    for p in grid {
        let spec = entry.spec(p)?;
        for &eps in epsilons {
            for &m in methods {
                cells.push((p, spec.clone(), eps, m));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(p, spec, eps, m)| {
            let r = run_method(&spec, m, eps, max_terms)?;
            Ok(IterationRow {
                series: series_id.to_string(),
                params: params_label(p),
                method: m.to_string(),
                epsilon: eps,
                n_evaluations: r.n_evaluations,
                log_sum: r.log_sum.ln(),
                converged: r.converged,
            })
        })
        .collect()
}

/// `(mu, nu)` rows of the COMP iteration table.
pub const COMP_ROWS: [(f64, f64); 4] = [(10.0, 0.1), (100.0, 0.01), (1000.0, 0.001), (10000.0, 0.0001)];

pub fn comp_grid() -> Vec<Params> {
    COMP_ROWS.iter().map(|&(mu, nu)| Params::new().set("mu", mu).set("nu", nu)).collect()
}

/// `|a - b|` from two log-magnitudes.
pub fn abs_error(a: LogValue, b: LogValue) -> f64 {
    let (hi, lo) = if a.ln() >= b.ln() { (a, b) } else { (b, a) };
    log_diff(hi, lo).map(LogValue::exp).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub series: String,
    pub params: String,
    pub epsilon: f64,
    pub method: String,
    pub ratio_limit: f64,
    pub n_evaluations: usize,
    pub log_sum: f64,
    pub log_exact: f64,
    pub abs_error: f64,
    /// Error of the long fixed cap used as the reference.
    pub ref_error: f64,
    pub hit_eps: bool,
    pub beat_ref: bool,
    pub either: bool,
    pub error: Option<String>,
}

/// Runs every method at every grid point and tolerance against the entry's
/// closed form. The reference is the `reference_terms`-term fixed cap.
pub fn accuracy_suite(
    series_id: &str,
    grid: &[Params],
    epsilons: &[f64],
    methods: &[MethodChoice],
    reference_terms: usize,
) -> Result<Vec<SuiteRow>> {
    let entry = lookup(series_id)?;
    let per_point: Vec<Vec<SuiteRow>> = grid
        .par_iter()
        .map(|p| suite_point(entry, p, epsilons, methods, reference_terms))
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn suite_point(
    entry: &CatalogEntry,
    p: &Params,
    epsilons: &[f64],
    methods: &[MethodChoice],
    reference_terms: usize,
) -> Result<Vec<SuiteRow>> {
    let spec = entry.spec(p)?;
    let exact = entry
        .closed_form(p)?
        .ok_or_else(|| crate::error::StatsError::Argument(format!("{} has no closed form here", entry.id)))?;
    let reference = fixed_cap(&spec, reference_terms - 1)?;
    let ref_error = abs_error(reference.log_sum, exact);
    let l = spec.ratio_limit.unwrap_or(f64::NAN);
    let mut rows = Vec::new();
    for &eps in epsilons {
        for &m in methods {
            let run = if m == MethodChoice::Cap(reference_terms) {
                Ok(reference.clone())
            } else {
                run_method(&spec, m, eps, reference_terms)
            };
            let row = match run {
                Ok(r) => {
                    let err = abs_error(r.log_sum, exact);
                    let hit = err < eps;
                    let beat = err <= ref_error;
                    SuiteRow {
                        series: entry.id.to_string(),
                        params: params_label(p),
                        epsilon: eps,
                        method: m.to_string(),
                        ratio_limit: l,
                        n_evaluations: r.n_evaluations,
                        log_sum: r.log_sum.ln(),
                        log_exact: exact.ln(),
                        abs_error: err,
                        ref_error,
                        hit_eps: hit,
                        beat_ref: beat,
                        either: hit || beat,
                        error: None,
                    }
                }
                Err(e) => SuiteRow {
                    series: entry.id.to_string(),
                    params: params_label(p),
                    epsilon: eps,
                    method: m.to_string(),
                    ratio_limit: l,
                    n_evaluations: 0,
                    log_sum: f64::NAN,
                    log_exact: exact.ln(),
                    abs_error: f64::NAN,
                    ref_error,
                    hit_eps: false,
                    beat_ref: false,
                    either: false,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessRate {
    pub method: String,
    /// `Some(true)` for rows with `L > 1/2`, when stratified.
    pub high_l: Option<bool>,
    pub n: usize,
    pub hit_eps: f64,
    pub beat_ref: f64,
    pub either: f64,
}

/// Success fractions per method, optionally split at `L = 1/2`.
pub fn success_rates(rows: &[SuiteRow], stratify: bool) -> Vec<SuccessRate> {
    let mut keys: Vec<(String, Option<bool>)> = Vec::new();
    for r in rows {
        let k = (r.method.clone(), stratify.then_some(r.ratio_limit > 0.5));
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(method, high_l)| {
            let sel: Vec<&SuiteRow> = rows
                .iter()
                .filter(|r| r.method == method && high_l.is_none_or(|h| (r.ratio_limit > 0.5) == h))
                .collect();
            let n = sel.len();
            let frac = |f: fn(&SuiteRow) -> bool| sel.iter().filter(|r| f(r)).count() as f64 / n as f64;
            SuccessRate {
                method,
                high_l,
                n,
                hit_eps: frac(|r| r.hit_eps),
                beat_ref: frac(|r| r.beat_ref),
                either: frac(|r| r.either),
            }
        })
        .collect()
}

/// `lambda x r` grid for Poisson factorial moments.
pub fn poisson_factorial_grid() -> Vec<Params> {
    let mut g = Vec::new();
    for lambda in [0.5, 1.0, 10.0, 100.0] {
        for r in [2.0, 5.0, 10.0] {
            g.push(Params::new().set("lambda", lambda).set("r", r));
        }
    }
    g
}

/// `mu x phi x eta x x` grid for the thinned negative binomial.
pub fn negbin_marginal_grid() -> Vec<Params> {
    let mut g = Vec::new();
    for mu in [1.0, 10.0, 100.0] {
        for phi in [0.1, 0.5, 1.0, 10.0] {
            for eta in [0.01, 0.1, 0.5, 0.75] {
                for x in [0.0, 5.0, 10.0] {
                    g.push(Params::new().set("mu", mu).set("phi", phi).set("eta", eta).set("x", x));
                }
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuaranteeRow {
    pub series: String,
    pub params: String,
    pub epsilon: f64,
    pub method: String,
    pub abs_error: f64,
    pub ref_error: f64,
    pub violation: bool,
    pub error: Option<String>,
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// A random parameter point of a family with a closed form.
pub fn random_closed_form_case<R: Rng>(rng: &mut R) -> (&'static str, Params) {
    match rng.random_range(0..10) {
        0 => ("geometric", Params::new().set("r", rng.random_range(0.001..0.99))),
        1 => (
            "poisson_fact_moment",
            Params::new().set("lambda", log_uniform(rng, 0.1, 100.0)).set("r", rng.random_range(1..=10) as f64),
        ),
        2 => (
            "negbin_marginal",
            Params::new()
                .set("x", rng.random_range(0..=20) as f64)
                .set("mu", log_uniform(rng, 0.5, 100.0))
                .set("phi", log_uniform(rng, 0.1, 10.0))
                .set("eta", rng.random_range(0.01..0.99)),
        ),
        3 => (
            "sentinel_rho0",
            Params::new().set("lambda", log_uniform(rng, 0.1, 50.0)).set("eta", rng.random_range(0.01..0.99)),
        ),
        4 => (
            "sentinel_rho0_negbin",
            Params::new()
                .set("mu", log_uniform(rng, 0.1, 50.0))
                .set("phi", log_uniform(rng, 0.1, 10.0))
                .set("eta", rng.random_range(0.01..0.99)),
        ),
        5 => (
            "sentinel_moment",
            Params::new().set("lambda", log_uniform(rng, 0.1, 50.0)).set("eta", rng.random_range(0.01..0.99)),
        ),
        6 => (
            "sentinel_moment_negbin",
            Params::new()
                .set("mu", log_uniform(rng, 0.1, 50.0))
                .set("phi", log_uniform(rng, 0.1, 10.0))
                .set("eta", rng.random_range(0.01..0.99)),
        ),
        7 => ("comp", Params::new().set("mu", log_uniform(rng, 0.1, 50.0)).set("nu", 1.0)),
        8 => ("comp_reparam", Params::new().set("mu", log_uniform(rng, 0.1, 50.0)).set("nu", 1.0)),
        _ => ("double_poisson", Params::new().set("mu", log_uniform(rng, 0.1, 50.0)).set("phi", 1.0)),
    }
}

/// Random closed-form cases, each summed by automatic dispatch and by
/// error-bounding pairs, checked against `max(eps, reference error)`.
pub fn guarantee_suite(n_draws: usize, seed: u64, reference_terms: usize) -> Result<Vec<GuaranteeRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let epsilons = [MACHINE_EPSILON, 10.0 * MACHINE_EPSILON, 1e4 * MACHINE_EPSILON, 1e-10];
    let cases: Vec<(&str, Params, f64)> = (0..n_draws)
        .map(|_| {
            let (id, p) = random_closed_form_case(&mut rng);
            let eps = epsilons[rng.random_range(0..epsilons.len())];
            (id, p, eps)
        })
        .collect();
    let rows: Vec<Vec<GuaranteeRow>> = cases
        .par_iter()
        .map(|(id, p, eps)| {
            let entry = lookup(id)?;
            let spec = entry.spec(p)?;
            let exact = entry.closed_form(p)?.expect("closed-form family");
            let ref_error = abs_error(reference_sum(&spec, reference_terms), exact);
            let mut out = Vec::new();
            for m in [MethodChoice::Auto, MethodChoice::ErrorBoundingPairs] {
                let row = match run_method(&spec, m, *eps, reference_terms) {
                    Ok(r) => {
                        let err = abs_error(r.log_sum, exact);
                        GuaranteeRow {
                            series: id.to_string(),
                            params: params_label(p),
                            epsilon: *eps,
                            method: m.to_string(),
                            abs_error: err,
                            ref_error,
                            violation: !(r.converged && err <= eps.max(ref_error)),
                            error: None,
                        }
                    }
                    Err(e) => GuaranteeRow {
                        series: id.to_string(),
                        params: params_label(p),
                        epsilon: *eps,
                        method: m.to_string(),
                        abs_error: f64::NAN,
                        ref_error,
                        violation: true,
                        error: Some(e.to_string()),
                    },
                };
                out.push(row);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}
