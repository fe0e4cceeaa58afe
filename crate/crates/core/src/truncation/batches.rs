use super::{log_ratio, total, reject_divergent, with_head_split, Method, TruncationConfig, TruncationResult};
use crate::error::{config, Result};
use crate::logspace::{log_add, log_sum_exp, LogValue};
use crate::series::{SeriesSpec, Terms};

/// Smallest batch size `N > L / (1 - L)` (at least 2).
pub fn min_batch_size(l: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&l) {
        return config(format!("batch size is defined for 0 <= L < 1, got {l}"));
    }
    let x = l / (1.0 - l);
    let k = x.round();
    let n = if (x - k).abs() <= 1e-9 * k.max(1.0) { k + 1.0 } else { x.ceil() };
    Ok((n as usize).max(2))
}

/// Sums in blocks of `N` terms (the first block holds `N + 1`) and stops at
/// block `j >= 2` once the block sum `D` is below `eps` and the last ratio
/// in the block is at most `D / (a + D)`, `a` being the block's last term.
pub fn batches(series: &SeriesSpec, cfg: &TruncationConfig) -> Result<TruncationResult> {
    cfg.validate_common()?;
    reject_divergent(series)?;
    let n = cfg.batch_size;
    if n < 2 {
        return config(format!("batch size must be at least 2, got {n}"));
    }
    if cfg.strict {
        if let Some(l) = series.ratio_limit {
            let need = min_batch_size(l)?;
            if n < need {
                return config(format!("batch size {n} too small for L={l}; need at least {need}"));
            }
        }
    }
    let log_eps = cfg.epsilon.ln();
    with_head_split(series, cfg, log_eps, |s, c, first, head| run(s, c, first, head, log_eps))
}

fn run(series: &SeriesSpec, cfg: &TruncationConfig, first: Option<LogValue>, head: &[LogValue], log_eps: f64) -> TruncationResult {
    let size = cfg.batch_size;
    let mut terms = Terms::new(series);
    let mut idx = series.index_offset;
    let mut buf: Vec<LogValue> = Vec::with_capacity(size + 1);
    buf.push(match first {
        Some(a) => {
            terms.evaluations += 1;
            a
        }
        None => terms.at(idx),
    });
    let mut prev = buf[0];
    let mut acc: Vec<LogValue> = head.to_vec();
    let mut j = 1usize;
    let mut lr = f64::NAN;
    let converged = loop {
        let mut capped = false;
        for _ in 0..size {
            if terms.evaluations >= cfg.max_terms {
                capped = true;
                break;
            }
            idx += 1;
            let cur = terms.at(idx);
            lr = log_ratio(cur, prev);
            prev = cur;
            buf.push(cur);
        }
        let delta = log_sum_exp(&buf).unwrap_or(LogValue::ZERO);
        acc.extend_from_slice(&buf);
        if capped {
            break false;
        }
        if j >= 2 && delta.ln() < log_eps {
            if prev.is_zero() {
                break true;
            }
            // r <= D / (a + D)
            let bound = -log_add(LogValue::ONE, LogValue::new(prev.ln() - delta.ln())).ln();
            if lr < 0.0 && lr <= bound {
                break true;
            }
        }
        j += 1;
        buf.clear();
    };
    TruncationResult {
        log_sum: total(&acc),
        n_evaluations: terms.evaluations,
        converged,
        method_used: Method::Batches,
        final_ratio: lr.exp(),
        bound_halfwidth: None,
        last_index: idx,
        batch_size: Some(size),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::RatioDirection;

    #[test]
    fn batch_size_table() {
        assert_eq!(min_batch_size(0.0).unwrap(), 2);
        assert_eq!(min_batch_size(0.5).unwrap(), 2);
        assert_eq!(min_batch_size(0.9).unwrap(), 10);
        assert_eq!(min_batch_size(0.99).unwrap(), 100);
        assert_eq!(min_batch_size(0.9756).unwrap(), 40);
        assert_eq!(min_batch_size(0.75).unwrap(), 4);
        assert!(min_batch_size(1.0).is_err());
        assert!(min_batch_size(-0.1).is_err());
    }

    fn geometric(r: f64) -> SeriesSpec {
        let lr = r.ln();
        SeriesSpec::new(move |n| n as f64 * lr).with_ratio_limit(r, RatioDirection::DecreasesToL).monotone(true)
    }

    #[test]
    fn evaluation_count_is_block_aligned() {
        let cfg = TruncationConfig::new(Method::Batches, 1e-12).with_batch_size(7);
        let r = batches(&geometric(0.5), &cfg).unwrap();
        assert!(r.converged);
        assert_eq!((r.n_evaluations - 1) % 7, 0);
        assert!(r.n_evaluations >= 15);
        assert!((r.sum() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn strict_rejects_small_batches() {
        let cfg = TruncationConfig::new(Method::Batches, 1e-12).with_batch_size(5);
        assert!(batches(&geometric(0.9), &cfg).is_err());
        assert!(batches(&geometric(0.9), &cfg.clone().strict(false)).is_ok());
        assert!(batches(&geometric(0.9), &cfg.with_batch_size(1).strict(false)).is_err());
    }

    #[test]
    fn zero_tail() {
        let s = SeriesSpec::new(|n| if n < 5 { 0.0 } else { f64::NEG_INFINITY }).monotone(true);
        let r = batches(&s, &TruncationConfig::new(Method::Batches, 1e-12).with_batch_size(3)).unwrap();
        assert!(r.converged);
        assert!((r.sum() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn cap_out_keeps_partial_sum() {
        let cfg = TruncationConfig::new(Method::Batches, 1e-300).with_batch_size(4).with_max_terms(10);
        let r = batches(&geometric(0.5), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.n_evaluations, 10);
        assert!((r.sum() - (2.0 - 0.5f64.powi(9))).abs() < 1e-15);
    }
}
