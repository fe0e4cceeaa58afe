//! Truncation of infinite sums of non-negative terms to a guaranteed
//! absolute tolerance, computed in log space.
//!
//! ```
//! use infsum::{truncate, Method, SeriesSpec, RatioDirection, TruncationConfig};
//!
//! // sum_n 3^n / n! = e^3
//! let s = SeriesSpec::new(|n| n as f64 * 3f64.ln() - infsum::special::ln_factorial(n))
//!     .with_ratio_limit(0.0, RatioDirection::DecreasesToL);
//! let r = truncate(&s, &TruncationConfig::new(Method::ErrorBoundingPairs, 1e-14)).unwrap();
//! assert!((r.sum() - 3f64.exp()).abs() < 1e-13);
//! ```

pub mod catalog;
pub mod error;
pub mod logspace;
pub mod series;
pub mod special;
pub mod truncation;

pub use error::{Error, Result};
pub use logspace::{log1mexp, log_add, log_diff, log_sum_exp, LogValue, MACHINE_EPSILON};
pub use series::{RatioDirection, SeriesSpec};
pub use truncation::{
    auto_dispatch, batches, bounding_pair, error_bounding_pairs, fixed_cap, min_batch_size, split_at_tail,
    sum_to_threshold, truncate, BoundingPair, Method, TailSplit, TruncationConfig, TruncationResult,
};
