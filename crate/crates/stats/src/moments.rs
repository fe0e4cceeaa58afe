//! Moments of count distributions by adaptive truncation.

use infsum::catalog::terms::{sentinel_moment, sentinel_rho0};
use infsum::catalog::CountDistribution;
use infsum::special::ln_factorial;
use infsum::{truncate, LogValue, RatioDirection, SeriesSpec, TruncationConfig, TruncationResult};

use crate::error::{arg, Result, StatsError};

fn run(series: &SeriesSpec, config: &TruncationConfig) -> Result<TruncationResult> {
    let r = truncate(series, config)?;
    if !r.converged {
        return Err(StatsError::NotConverged { n_evaluations: r.n_evaluations, last_index: r.last_index });
    }
    Ok(r)
}

fn moment_series(base: CountDistribution, offset: u64, weight: impl Fn(u64) -> f64 + Send + Sync + 'static) -> SeriesSpec {
    // polynomial weights leave the ratio limit of the pmf unchanged
    SeriesSpec::new(move |n| weight(n) + base.ln_pmf(n))
        .with_ratio_limit(base.ratio_limit(), RatioDirection::Unknown)
        .with_offset(offset)
}

/// `E[(Y)_r] = sum_{n>=r} n!/(n-r)! p(n)`.
pub fn factorial_moment(base: CountDistribution, r: u64, config: &TruncationConfig) -> Result<LogValue> {
    if r < 1 {
        return arg("moment order must be at least 1");
    }
    let s = moment_series(base, r, move |n| ln_factorial(n) - ln_factorial(n - r));
    Ok(run(&s, config)?.log_sum)
}

/// `E[Y^r] = sum_{n>=1} n^r p(n)`.
pub fn raw_moment(base: CountDistribution, r: u64, config: &TruncationConfig) -> Result<LogValue> {
    if r < 1 {
        return arg("moment order must be at least 1");
    }
    let s = moment_series(base, 1, move |n| r as f64 * (n as f64).ln());
    Ok(run(&s, config)?.log_sum)
}

/// Pieces of the expected size of a detected cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentinelCluster {
    /// Probability that a cluster goes undetected.
    pub rho0: f64,
    /// `E[Y (1-eta)^Y]`.
    pub undetected_moment: f64,
    pub expected_size: f64,
}

/// `E[X'] = (E[Y] - E[Y (1-eta)^Y]) / (1 - rho0)` for detection probability
/// `1 - (1-eta)^Y`.
pub fn sentinel_expected_cluster_size(
    base: CountDistribution,
    eta: f64,
    config: &TruncationConfig,
) -> Result<SentinelCluster> {
    let rho0 = run(&sentinel_rho0(base, eta)?, config)?.log_sum;
    let m = run(&sentinel_moment(base, eta)?, config)?.log_sum;
    let detect = -rho0.ln().exp_m1();
    if !(detect > 1e-12) {
        return arg(format!("detection probability {detect:e} is numerically zero"));
    }
    let mean = base.mean();
    Ok(SentinelCluster {
        rho0: rho0.exp(),
        undetected_moment: m.exp(),
        expected_size: (mean - m.exp()) / detect,
    })
}
