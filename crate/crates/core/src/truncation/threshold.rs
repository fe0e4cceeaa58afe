use super::{log_ratio, total, reject_divergent, with_head_split, Method, TruncationConfig, TruncationResult};
use crate::error::{config, Result};
use crate::logspace::{LogValue};
use crate::series::{SeriesSpec, Terms};

/// Sums until a term on a decreasing step falls below `eps * (1 - M) / M`.
///
/// In strict mode the step ratio must also be below `M` and a known
/// `L >= M` is rejected up front.
pub fn sum_to_threshold(series: &SeriesSpec, cfg: &TruncationConfig) -> Result<TruncationResult> {
    cfg.validate_common()?;
    reject_divergent(series)?;
    let m = cfg.threshold_m;
    if !(m > 0.0 && m < 1.0) {
        return config(format!("threshold M must lie in (0, 1), got {m}"));
    }
    if cfg.strict {
        if let Some(l) = series.ratio_limit {
            if l >= m {
                return config(format!("threshold rule needs L < M, got L={l}, M={m}"));
            }
        }
    }
    let log_stop = cfg.epsilon.ln() + (-m).ln_1p() - m.ln();
    with_head_split(series, cfg, log_stop, |s, c, first, head| run(s, c, first, head, log_stop))
}

fn run(series: &SeriesSpec, cfg: &TruncationConfig, first: Option<LogValue>, head: &[LogValue], log_stop: f64) -> TruncationResult {
    let log_m = cfg.threshold_m.ln();
    let mut terms = Terms::new(series);
    let mut n = series.index_offset;
    let mut prev = match first {
        Some(a) => {
            terms.evaluations += 1;
            a
        }
        None => terms.at(n),
    };
    let mut acc: Vec<LogValue> = head.to_vec();
    acc.push(prev);
    let mut lr = f64::NAN;
    let mut converged = false;
    while terms.evaluations < cfg.max_terms {
        n += 1;
        let cur = terms.at(n);
        acc.push(cur);
        lr = log_ratio(cur, prev);
        if lr < 0.0 && cur.ln() < log_stop && (!cfg.strict || lr < log_m) {
            converged = true;
            break;
        }
        prev = cur;
    }
    TruncationResult {
        log_sum: total(&acc),
        n_evaluations: terms.evaluations,
        converged,
        method_used: Method::SumToThreshold,
        final_ratio: lr.exp(),
        bound_halfwidth: None,
        last_index: n,
        batch_size: None,
    }
}
