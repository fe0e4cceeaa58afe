//! Log-space representation and compensated accumulation of non-negative
//! magnitudes.
//!
//! Every quantity summed by this crate is non-negative, so it is carried as
//! its natural logarithm. Exact zero is `-inf`, which all operations here
//! accept without producing NaN.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{domain, Result};

/// Double precision machine epsilon, 2^-52.
pub const MACHINE_EPSILON: f64 = f64::EPSILON;

/// A non-negative magnitude stored as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a log-magnitude. `-inf` encodes zero.
    #[inline]
    pub fn new(logval: f64) -> Self {
        debug_assert!(!logval.is_nan(), "NaN log-magnitude");
        LogValue(logval)
    }

    pub fn from_magnitude(x: f64) -> Result<Self> {
        if x.is_nan() || x < 0.0 {
            return domain(format!("magnitude must be non-negative, got {x}"));
        }
        Ok(LogValue(x.ln()))
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Multiplication of magnitudes.
    #[inline]
    pub fn mul(self, other: LogValue) -> LogValue {
        if self.is_zero() || other.is_zero() {
            return LogValue::ZERO;
        }
        LogValue(self.0 + other.0)
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log({})", self.0)
    }
}

impl From<LogValue> for f64 {
    fn from(v: LogValue) -> f64 {
        v.0
    }
}

/// `log(1 - exp(x))` for `x <= 0`.
///
/// Switches between `log(-expm1(x))` and `log1p(-exp(x))` at `x = -ln 2`.
pub fn log1mexp(x: f64) -> f64 {
    debug_assert!(x <= 0.0 || x.is_nan());
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add(a: LogValue, b: LogValue) -> LogValue {
    let (hi, lo) = if a.0 >= b.0 { (a.0, b.0) } else { (b.0, a.0) };
    if lo == f64::NEG_INFINITY {
        return LogValue(hi);
    }
    LogValue(hi + (lo - hi).exp().ln_1p())
}

/// `log(exp(a) - exp(b))`, defined for `a >= b`.
pub fn log_diff(a: LogValue, b: LogValue) -> Result<LogValue> {
    if a.0 < b.0 {
        return domain(format!(
            "log_diff needs a >= b, got a={} b={}",
            a.0, b.0
        ));
    }
    if b.is_zero() {
        return Ok(a);
    }
    if a.0 == b.0 {
        return Ok(LogValue::ZERO);
    }
    Ok(LogValue(a.0 + log1mexp(b.0 - a.0)))
}

/// A signed real carried as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub negative: bool,
    pub magnitude: LogValue,
}

impl SignedLog {
    pub fn positive(magnitude: LogValue) -> Self {
        SignedLog { negative: false, magnitude }
    }

    /// `exp(pos) - exp(neg)` without leaving log-space.
    pub fn difference(pos: LogValue, neg: LogValue) -> Self {
        if pos.0 >= neg.0 {
            SignedLog { negative: false, magnitude: log_diff(pos, neg).expect("ordered") }
        } else {
            SignedLog { negative: true, magnitude: log_diff(neg, pos).expect("ordered") }
        }
    }

    pub fn value(self) -> f64 {
        let m = self.magnitude.exp();
        if self.negative {
            -m
        } else {
            m
        }
    }
}

/// The two pieces of a log-sum-exp evaluation: the largest input and the
/// `log1p` of the shifted residual sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExpParts {
    pub max: f64,
    pub log1p_residual: f64,
}

impl LogSumExpParts {
    pub fn total(self) -> LogValue {
        if self.max == f64::NEG_INFINITY {
            return LogValue::ZERO;
        }
        LogValue(self.max + self.log1p_residual)
    }
}

/// Log-sum-exp with the residual summed in ascending order by compensated
/// addition.
pub fn log_sum_exp_parts(values: &[LogValue]) -> Result<LogSumExpParts> {
    if values.is_empty() {
        return domain("log_sum_exp of an empty sequence");
    }
    if values.iter().any(|v| v.0.is_nan()) {
        return domain("log_sum_exp input contains NaN");
    }
    let mut sorted: Vec<f64> = values.iter().map(|v| v.0).collect();
    sorted.sort_by(f64::total_cmp);
    let (max, rest) = sorted.split_last().expect("non-empty");
    let max = *max;
    if max == f64::NEG_INFINITY {
        return Ok(LogSumExpParts { max, log1p_residual: 0.0 });
    }
    let mut acc = ExtendedAccumulator::new();
    for &l in rest {
        acc.add((l - max).exp());
    }
    Ok(LogSumExpParts { max, log1p_residual: acc.value().ln_1p() })
}

/// `log(sum(exp(l_i)))`.
pub fn log_sum_exp(values: &[LogValue]) -> Result<LogValue> {
    log_sum_exp_parts(values).map(LogSumExpParts::total)
}

/// Running sum with a Kahan compensation term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedAccumulator {
    pub sum: f64,
    pub compensation: f64,
}

impl CompensatedAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_first(x0: f64) -> Self {
        CompensatedAccumulator { sum: x0, compensation: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }

    fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.compensation *= factor;
    }
}

/// Functional form of a single compensated update.
#[inline]
pub fn kahan_add(mut acc: CompensatedAccumulator, x: f64) -> CompensatedAccumulator {
    acc.add(x);
    acc
}

/// Sum of non-negative reals, sorted ascending and folded with [`kahan_add`].
pub fn sorted_compensated_sum(values: &[f64]) -> Result<f64> {
    if let Some(bad) = values.iter().find(|x| x.is_nan() || **x < 0.0) {
        return domain(format!("sorted_compensated_sum needs non-negative inputs, got {bad}"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted
        .into_iter()
        .fold(CompensatedAccumulator::new(), kahan_add)
        .value())
}

/// Condition number of a sum, `sum |p_i| / |sum p_i|`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ConditionNumber(f64);

impl ConditionNumber {
    /// `None` when the sum is exactly zero.
    pub fn of(values: &[f64]) -> Option<Self> {
        let total: f64 = values.iter().sum();
        if total == 0.0 {
            return None;
        }
        let abs: f64 = values.iter().map(|x| x.abs()).sum();
        Some(ConditionNumber((abs / total.abs()).max(1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Error-free transformation `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Cascaded two-sum accumulator; the result is as accurate as summing in
/// twice the working precision and rounding once.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtendedAccumulator {
    hi: f64,
    lo: f64,
}

impl ExtendedAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Streaming log-space sum: the running total is kept as a shift (the
/// largest log-term seen) plus a compensated sum of shifted magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    shift: f64,
    acc: CompensatedAccumulator,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogAccumulator {
    pub fn new() -> Self {
        LogAccumulator { shift: f64::NEG_INFINITY, acc: CompensatedAccumulator::new() }
    }

    pub fn add(&mut self, term: LogValue) {
        let l = term.0;
        if l == f64::NEG_INFINITY {
            return;
        }
        if self.shift == f64::NEG_INFINITY {
            self.shift = l;
            self.acc = CompensatedAccumulator::with_first(1.0);
        } else if l > self.shift {
            self.acc.scale((self.shift - l).exp());
            self.shift = l;
            self.acc.add(1.0);
        } else {
            self.acc.add((l - self.shift).exp());
        }
    }

    pub fn value(&self) -> LogValue {
        if self.shift == f64::NEG_INFINITY {
            return LogValue::ZERO;
        }
        let s = self.acc.value();
        LogValue(self.shift + s.ln())
    }
}
