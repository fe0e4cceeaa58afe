use super::{log_ratio, reject_divergent_for_cap, Method, TruncationResult};
use crate::error::Result;
use crate::logspace::{log_sum_exp, LogValue};
use crate::series::SeriesSpec;

/// Sums the `K + 1` terms at indices `offset..=offset + K`. Always reports
/// `converged`; no error control.
pub fn fixed_cap(series: &SeriesSpec, k: usize) -> Result<TruncationResult> {
    reject_divergent_for_cap(series)?;
    let off = series.index_offset;
    let terms: Vec<LogValue> = (0..=k as u64).map(|i| series.log_term(off + i)).collect();
    let final_ratio = if k >= 1 { log_ratio(terms[k], terms[k - 1]).exp() } else { f64::NAN };
    Ok(TruncationResult {
        log_sum: log_sum_exp(&terms)?,
        n_evaluations: k + 1,
        converged: true,
        method_used: Method::FixedCap,
        final_ratio,
        bound_halfwidth: None,
        last_index: off + k as u64,
        batch_size: None,
    })
}
