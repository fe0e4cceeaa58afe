//! Adaptive truncation of non-negative series to an absolute tolerance.
//!
//! Three stopping rules are provided, each with a different validity
//! condition on the ratio limit `L = lim a(n+1)/a(n)`:
//!
//! | method | valid when |
//! |---|---|
//! | [`sum_to_threshold`] | `L < M` (`M = 0.5` by default) |
//! | [`error_bounding_pairs`] | any `L < 1`, with `L` supplied |
//! | [`batches`] | batch size `N > L / (1 - L)` |
//!
//! [`fixed_cap`] is the non-adaptive baseline and [`auto_dispatch`] picks a
//! method from the series' ratio limit. All stopping comparisons are made on
//! log-magnitudes.

mod batches;
mod bounds;
mod ebp;
mod fixed;
mod split;
mod threshold;

use std::fmt;
use std::str::FromStr;

use crate::error::{config, Error, Result};
use crate::logspace::LogValue;
use crate::series::SeriesSpec;

pub use batches::{batches, min_batch_size};
pub use bounds::{bounding_pair, BoundingPair};
pub use ebp::error_bounding_pairs;
pub use fixed::fixed_cap;
pub use split::{split_at_tail, TailSplit};
pub use threshold::sum_to_threshold;

/// Batch size used by [`auto_dispatch`] when `L` is unknown; covers every
/// series with `L < 0.99`.
pub const UNKNOWN_LIMIT_BATCH_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    SumToThreshold,
    ErrorBoundingPairs,
    Batches,
    FixedCap,
    Auto,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::SumToThreshold => "threshold",
            Method::ErrorBoundingPairs => "ebp",
            Method::Batches => "batches",
            Method::FixedCap => "fixed",
            Method::Auto => "auto",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "threshold" | "sum_to_threshold" | "sum-to-threshold" => Ok(Method::SumToThreshold),
            "ebp" | "error_bounding_pairs" | "error-bounding-pairs" => Ok(Method::ErrorBoundingPairs),
            "batches" | "batch" => Ok(Method::Batches),
            "fixed" | "fixed_cap" | "cap" => Ok(Method::FixedCap),
            "auto" => Ok(Method::Auto),
            other => config(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationConfig {
    pub method: Method,
    /// Absolute tolerance on the truncated sum.
    pub epsilon: f64,
    /// `M` of the threshold rule.
    pub threshold_m: f64,
    pub batch_size: usize,
    /// Hard limit on term evaluations.
    pub max_terms: usize,
    /// `K` for [`Method::FixedCap`]: indices `0..=K` are summed.
    pub cap_k: usize,
    /// When set, configurations that cannot honour the tolerance for the
    /// series' known `L` are rejected, and the threshold rule also requires
    /// `a(n)/a(n-1) < M` before stopping. Clearing it gives the plain
    /// "stop once the term drops below the tolerance" rule.
    pub strict: bool,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            method: Method::Auto,
            epsilon: MACHINE_EPSILON_TOL,
            threshold_m: 0.5,
            batch_size: 40,
            max_terms: 100_000,
            cap_k: 1000,
            strict: true,
        }
    }
}

const MACHINE_EPSILON_TOL: f64 = crate::logspace::MACHINE_EPSILON;

impl TruncationConfig {
    pub fn new(method: Method, epsilon: f64) -> Self {
        TruncationConfig { method, epsilon, ..Default::default() }
    }

    pub fn with_batch_size(mut self, n: usize) -> Self {
        self.batch_size = n;
        self
    }

    pub fn with_max_terms(mut self, n: usize) -> Self {
        self.max_terms = n;
        self
    }

    pub fn with_cap(mut self, k: usize) -> Self {
        self.cap_k = k;
        self
    }

    pub fn with_threshold_m(mut self, m: f64) -> Self {
        self.threshold_m = m;
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    fn validate_common(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return config(format!("epsilon must be positive and finite, got {}", self.epsilon));
        }
        if self.max_terms < 2 {
            return config("max_terms must be at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationResult {
    pub log_sum: LogValue,
    /// Number of term-function calls.
    pub n_evaluations: usize,
    pub converged: bool,
    pub method_used: Method,
    /// `a(n)/a(n-1)` at the last evaluated index.
    pub final_ratio: f64,
    /// Half-width of the final bracket (error-bounding pairs only).
    pub bound_halfwidth: Option<LogValue>,
    /// Index of the last evaluated term.
    pub last_index: u64,
    /// Batch size actually used (batches only).
    pub batch_size: Option<usize>,
}

impl TruncationResult {
    pub fn sum(&self) -> f64 {
        self.log_sum.exp()
    }
}

fn reject_divergent(series: &SeriesSpec) -> Result<()> {
    match series.ratio_limit {
        Some(l) if l >= 1.0 => Err(Error::UnsupportedSeries(l)),
        Some(l) if !(l >= 0.0) => config(format!("ratio limit must lie in [0, 1), got {l}")),
        _ => Ok(()),
    }
}

/// Sum of collected terms: max shift plus a compensated sum of the sorted
/// residuals, so the result does not depend on the order terms arrived in.
fn total(terms: &[LogValue]) -> LogValue {
    crate::logspace::log_sum_exp(terms).unwrap_or(LogValue::ZERO)
}

/// Fixed caps sum finitely many terms, so only malformed limits are refused.
fn reject_divergent_for_cap(series: &SeriesSpec) -> Result<()> {
    match series.ratio_limit {
        Some(l) if !(l >= 0.0) => config(format!("ratio limit must be non-negative, got {l}")),
        _ => Ok(()),
    }
}

/// `ln(a_next / a_prev)` with zero terms handled: growth out of a zero is
/// `+inf`, a run of zeros counts as flat.
#[inline]
pub(crate) fn log_ratio(next: LogValue, prev: LogValue) -> f64 {
    if prev.is_zero() {
        if next.is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        next.ln() - prev.ln()
    }
}

/// Runs `core` on the series, first summing any increasing head exactly when
/// the series is not monotone and its first term already lies below the
/// stopping level (a first term above the level cannot trigger a stop before
/// the mode).
fn with_head_split<F>(
    series: &SeriesSpec,
    cfg: &TruncationConfig,
    log_stop_level: f64,
    core: F,
) -> Result<TruncationResult>
where
    F: Fn(&SeriesSpec, &TruncationConfig, Option<LogValue>, &[LogValue]) -> TruncationResult,
{
    let first = series.log_term(series.index_offset);
    if series.monotone || first.ln() >= log_stop_level {
        return Ok(core(series, cfg, Some(first), &[]));
    }
    let split = split::split_with_first(series, first, cfg.max_terms)?;
    let remaining = cfg.max_terms.saturating_sub(split.n_evaluations);
    if remaining < 2 {
        return Ok(TruncationResult {
            log_sum: split.head,
            n_evaluations: split.n_evaluations,
            converged: false,
            method_used: cfg.method,
            final_ratio: f64::NAN,
            bound_halfwidth: None,
            last_index: split.mode_index,
            batch_size: None,
        });
    }
    let tail_cfg = TruncationConfig { max_terms: remaining, ..cfg.clone() };
    // head terms join the tail's final summation
    let mut result = core(&split.tail, &tail_cfg, None, &split.head_terms);
    result.n_evaluations += split.n_evaluations;
    Ok(result)
}

/// Runs the method named in `config`.
pub fn truncate(series: &SeriesSpec, config: &TruncationConfig) -> Result<TruncationResult> {
    match config.method {
        Method::SumToThreshold => sum_to_threshold(series, config),
        Method::ErrorBoundingPairs => error_bounding_pairs(series, config),
        Method::Batches => batches(series, config),
        Method::FixedCap => fixed_cap(series, config.cap_k),
        Method::Auto => auto_dispatch(series, config),
    }
}

/// Chooses the method from the series' ratio limit: threshold (`M = 0.5`)
/// for `L < 0.5`, batches with `N >= min_batch_size(L)` for larger `L`, and
/// batches with `N = 100` when `L` is unknown.
pub fn auto_dispatch(series: &SeriesSpec, config: &TruncationConfig) -> Result<TruncationResult> {
    reject_divergent(series)?;
    match series.ratio_limit {
        Some(l) if l < 0.5 => {
            let cfg = TruncationConfig {
                method: Method::SumToThreshold,
                threshold_m: 0.5,
                strict: true,
                ..config.clone()
            };
            sum_to_threshold(series, &cfg)
        }
        Some(l) => {
            let n = config.batch_size.max(min_batch_size(l)?);
            let cfg = TruncationConfig {
                method: Method::Batches,
                batch_size: n,
                strict: true,
                ..config.clone()
            };
            batches(series, &cfg)
        }
        None => {
            let cfg = TruncationConfig {
                method: Method::Batches,
                batch_size: UNKNOWN_LIMIT_BATCH_SIZE,
                strict: true,
                ..config.clone()
            };
            batches(series, &cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::RatioDirection;

    fn geometric(r: f64) -> SeriesSpec {
        let lr = r.ln();
        SeriesSpec::new(move |n| n as f64 * lr)
            .with_ratio_limit(r, RatioDirection::DecreasesToL)
            .monotone(true)
    }

    #[test]
    fn auto_picks_threshold_for_small_limit() {
        let s = SeriesSpec::new(|n| -crate::special::ln_factorial(n)).with_ratio_limit(0.0, RatioDirection::DecreasesToL);
        let r = auto_dispatch(&s, &TruncationConfig::new(Method::Auto, 1e-12)).unwrap();
        assert_eq!(r.method_used, Method::SumToThreshold);
        assert!((r.sum() - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn auto_picks_batches_for_large_limit() {
        let r = auto_dispatch(&geometric(0.9), &TruncationConfig::new(Method::Auto, 1e-12).with_batch_size(2)).unwrap();
        assert_eq!(r.method_used, Method::Batches);
        assert!(r.batch_size.unwrap() >= 10);
    }

    #[test]
    fn auto_uses_hundred_when_limit_unknown() {
        let mut s = geometric(0.3);
        s.ratio_limit = None;
        let r = auto_dispatch(&s, &TruncationConfig::new(Method::Auto, 1e-12)).unwrap();
        assert_eq!(r.method_used, Method::Batches);
        assert_eq!(r.batch_size, Some(100));
    }

    #[test]
    fn auto_rejects_limit_one() {
        let s = SeriesSpec::new(|n| -((n as f64 + 1.0) * (n as f64 + 2.0)).ln())
            .with_ratio_limit(1.0, RatioDirection::IncreasesToL);
        let err = auto_dispatch(&s, &TruncationConfig::default()).unwrap_err();
        assert_eq!(err, Error::UnsupportedSeries(1.0));
        assert!(err.to_string().contains("ratio limit L=1 unsupported"));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::SumToThreshold, Method::ErrorBoundingPairs, Method::Batches, Method::FixedCap, Method::Auto] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("simpson".parse::<Method>().is_err());
    }

    #[test]
    fn zero_terms_in_ratio() {
        assert_eq!(log_ratio(LogValue::ZERO, LogValue::ZERO), 0.0);
        assert_eq!(log_ratio(LogValue::ONE, LogValue::ZERO), f64::INFINITY);
        assert_eq!(log_ratio(LogValue::ZERO, LogValue::ONE), f64::NEG_INFINITY);
    }
}
