use std::fmt;
use std::sync::Arc;

use crate::logspace::LogValue;

/// How the term ratio `a(n+1)/a(n)` approaches its limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioDirection {
    DecreasesToL,
    IncreasesToL,
    Unknown,
}

type LogTermFn = dyn Fn(u64) -> f64 + Send + Sync;

/// A non-negative series `sum_{n >= index_offset} a(n)` given by its log-terms.
///
/// Parameters are bound into the term closure when the spec is built, so a
/// `SeriesSpec` is an immutable value that can be shared across threads.
#[derive(Clone)]
pub struct SeriesSpec {
    log_term: Arc<LogTermFn>,
    /// Analytic `lim a(n+1)/a(n)`, when known.
    pub ratio_limit: Option<f64>,
    pub ratio_direction: RatioDirection,
    /// First summed index.
    pub index_offset: u64,
    /// `true` when the terms are non-increasing from `index_offset` on.
    /// Unimodal series (a mode after the offset) set this to `false`.
    pub monotone: bool,
}

impl SeriesSpec {
    /// `log_term(n)` must return `ln a(n)`, with `-inf` for a zero term.
    pub fn new<F>(log_term: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        SeriesSpec {
            log_term: Arc::new(log_term),
            ratio_limit: None,
            ratio_direction: RatioDirection::Unknown,
            index_offset: 0,
            monotone: false,
        }
    }

    pub fn with_ratio_limit(mut self, limit: f64, direction: RatioDirection) -> Self {
        self.ratio_limit = Some(limit);
        self.ratio_direction = direction;
        self
    }

    pub fn with_offset(mut self, offset: u64) -> Self {
        self.index_offset = offset;
        self
    }

    pub fn monotone(mut self, monotone: bool) -> Self {
        self.monotone = monotone;
        self
    }

    #[inline]
    pub fn log_term(&self, n: u64) -> LogValue {
        LogValue::new((self.log_term)(n))
    }

    /// Same terms, summation starting at `offset`.
    pub fn tail_from(&self, offset: u64) -> SeriesSpec {
        SeriesSpec { index_offset: offset, ..self.clone() }
    }
}

impl fmt::Debug for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesSpec")
            .field("ratio_limit", &self.ratio_limit)
            .field("ratio_direction", &self.ratio_direction)
            .field("index_offset", &self.index_offset)
            .field("monotone", &self.monotone)
            .finish_non_exhaustive()
    }
}

/// Wraps a series and counts term-function calls.
pub(crate) struct Terms<'a> {
    spec: &'a SeriesSpec,
    pub evaluations: usize,
}

impl<'a> Terms<'a> {
    pub fn new(spec: &'a SeriesSpec) -> Self {
        Terms { spec, evaluations: 0 }
    }

    #[inline]
    pub fn at(&mut self, n: u64) -> LogValue {
        self.evaluations += 1;
        self.spec.log_term(n)
    }
}
