use std::f64::consts::LN_2;

use super::{log_ratio, total, reject_divergent, with_head_split, Method, TruncationConfig, TruncationResult};
use crate::error::{config, Result};
use crate::logspace::{log1mexp, log_add, log_diff, LogValue};
use crate::series::{SeriesSpec, Terms};
use crate::MACHINE_EPSILON;

/// Sums until the bracket `S(n-1) + a(n)/(1-L)`, `S(n-1) + a(n)/(1-r)` with
/// `r = a(n)/a(n-1)` is narrower than `2 eps`, then returns its midpoint.
/// Requires `ratio_limit`.
pub fn error_bounding_pairs(series: &SeriesSpec, cfg: &TruncationConfig) -> Result<TruncationResult> {
    cfg.validate_common()?;
    reject_divergent(series)?;
    let Some(l) = series.ratio_limit else {
        return config("error-bounding pairs need the ratio limit L");
    };
    let log_eps = cfg.epsilon.ln();
    with_head_split(series, cfg, log_eps, |s, c, first, head| run(s, c, first, head, l.ln(), log_eps))
}

/// `ln |1/(1-r) - 1/(1-L)|` from `ln r` and `ln L`.
fn log_gap(lr: f64, ll: f64) -> f64 {
    let (hi, lo) = if lr >= ll { (lr, ll) } else { (ll, lr) };
    let num = log_diff(LogValue::new(hi), LogValue::new(lo)).map(LogValue::ln).unwrap_or(f64::NEG_INFINITY);
    num - log1mexp(lr) - log1mexp(ll)
}

/// Bracket width per unit term: the gap above plus the spread of `1/(1-r)`
/// caused by rounding in the two log-terms that give `r`. Without the second
/// part a ratio that happens to round onto `L` closes the bracket early.
fn log_width(lr: f64, ll: f64, cur: LogValue, prev: LogValue) -> f64 {
    let noise = MACHINE_EPSILON * (cur.ln().abs() + prev.ln().abs()).max(1.0);
    // d/dlr 1/(1-e^lr) = e^lr / (1-e^lr)^2
    let spread = noise.ln() + lr - 2.0 * log1mexp(lr);
    log_add(LogValue::new(log_gap(lr, ll)), LogValue::new(spread)).ln()
}

fn run(
    series: &SeriesSpec,
    cfg: &TruncationConfig,
    first: Option<LogValue>,
    head: &[LogValue],
    ll: f64,
    log_eps: f64,
) -> TruncationResult {
    let mut terms = Terms::new(series);
    let mut n = series.index_offset;
    let mut prev = match first {
        Some(a) => {
            terms.evaluations += 1;
            a
        }
        None => terms.at(n),
    };
    // holds S(n-1)
    let mut acc: Vec<LogValue> = head.to_vec();
    let mut lr = f64::NAN;
    let mut cur = prev;
    while terms.evaluations < cfg.max_terms {
        n += 1;
        cur = terms.at(n);
        acc.push(prev);
        lr = log_ratio(cur, prev);
        if lr < 0.0 && cur.ln() + log_width(lr, ll, cur, prev) < LN_2 + log_eps {
            let mid = LogValue::new(cur.ln() - LN_2 + log_add(LogValue::new(-log1mexp(ll)), LogValue::new(-log1mexp(lr))).ln());
            let half = LogValue::new(cur.ln() - LN_2 + log_width(lr, ll, cur, prev));
            acc.push(mid);
            return TruncationResult {
                log_sum: total(&acc),
                n_evaluations: terms.evaluations,
                converged: true,
                method_used: Method::ErrorBoundingPairs,
                final_ratio: lr.exp(),
                bound_halfwidth: Some(half),
                last_index: n,
                batch_size: None,
            };
        }
        prev = cur;
    }
    acc.push(cur);
    TruncationResult {
        log_sum: total(&acc),
        n_evaluations: terms.evaluations,
        converged: false,
        method_used: Method::ErrorBoundingPairs,
        final_ratio: lr.exp(),
        bound_halfwidth: None,
        last_index: n,
        batch_size: None,
    }
}
