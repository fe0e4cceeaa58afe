use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, LogValue};
use crate::series::SeriesSpec;

/// An exactly summed head plus the monotone tail that follows it.
#[derive(Debug, Clone)]
pub struct TailSplit {
    /// `ln` of the sum over `offset..mode_index`.
    pub head: LogValue,
    /// The series restarted at `mode_index`, flagged monotone.
    pub tail: SeriesSpec,
    pub mode_index: u64,
    pub n_evaluations: usize,
    pub first_term: LogValue,
    /// Terms over `offset..mode_index`.
    pub head_terms: Vec<LogValue>,
}

impl TailSplit {
    /// `false` when the first term is already at least `epsilon`: a term that
    /// large cannot satisfy a stopping rule before the mode, so the split
    /// could have been skipped.
    pub fn mode_search_needed(&self, epsilon: f64) -> bool {
        self.first_term.ln() < epsilon.ln()
    }
}

/// Scans forward for the first `n0` with `a(n0+2) < a(n0+1) < a(n0)` and
/// splits the series there. Fails with [`Error::ModeNotFound`] after
/// `probe_limit` evaluations.
pub fn split_at_tail(series: &SeriesSpec, probe_limit: usize) -> Result<TailSplit> {
    let first = series.log_term(series.index_offset);
    split_with_first(series, first, probe_limit)
}

pub(crate) fn split_with_first(series: &SeriesSpec, first: LogValue, probe_limit: usize) -> Result<TailSplit> {
    let off = series.index_offset;
    let mut seen = vec![first];
    let mut evals = 1usize;
    loop {
        // seen[i] is a(off + i); test n0 = off + len - 3
        if seen.len() >= 3 {
            let k = seen.len();
            let (a0, a1, a2) = (seen[k - 3], seen[k - 2], seen[k - 1]);
            if a1.ln() < a0.ln() && a2.ln() < a1.ln() {
                let head_terms = &seen[..k - 3];
                let head = if head_terms.is_empty() { LogValue::ZERO } else { log_sum_exp(head_terms)? };
                let mode_index = off + (k - 3) as u64;
                return Ok(TailSplit {
                    head,
                    tail: series.tail_from(mode_index).monotone(true),
                    mode_index,
                    n_evaluations: evals,
                    first_term: first,
                    head_terms: head_terms.to_vec(),
                });
            }
        }
        if evals >= probe_limit {
            return Err(Error::ModeNotFound { probe_limit });
        }
        seen.push(series.log_term(off + seen.len() as u64));
        evals += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_factorial;

    #[test]
    fn finds_poisson_mode() {
        // lambda^n / n!, mode at floor(lambda) 
        let s = SeriesSpec::new(|n| n as f64 * 50.5f64.ln() - ln_factorial(n));
        let sp = split_at_tail(&s, 1000).unwrap();
        assert_eq!(sp.mode_index, 50);
        assert_eq!(sp.n_evaluations, 53);
        assert!(sp.tail.monotone);
        assert_eq!(sp.tail.index_offset, 50);
        let head: f64 = (0..50).map(|n| (n as f64 * 50.5f64.ln() - ln_factorial(n)).exp()).sum();
        assert!((sp.head.exp() / head - 1.0).abs() < 1e-13);
        assert!(sp.mode_search_needed(2.0));
        assert!(!sp.mode_search_needed(1e-3));
    }

    #[test]
    fn already_decreasing() {
        let s = SeriesSpec::new(|n| -(n as f64));
        let sp = split_at_tail(&s, 10).unwrap();
        assert_eq!(sp.mode_index, 0);
        assert!(sp.head.is_zero());
    }

    #[test]
    fn probe_limit() {
        let s = SeriesSpec::new(|n| n as f64);
        assert_eq!(split_at_tail(&s, 25).unwrap_err(), Error::ModeNotFound { probe_limit: 25 });
    }
}
