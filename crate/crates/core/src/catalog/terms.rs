//! Log-term functions and their series builders.
//!
//! Ratio limits (`a(n+1)/a(n)` as `n -> inf`):
//!
//! - COMP `mu^n/(n!)^nu`: ratio `mu/(n+1)^nu`, decreasing to 0.
//! - reparametrised COMP: ratio `(mu/(n+1))^nu`, decreasing to 0.
//! - double Poisson: ratio is `(e mu/(n+1))^phi` times factors tending to
//!   `e^-1`, `e` and `e^-phi`, so it decreases to 0.
//! - power times geometric: ratio `(n+1)^2/((n+2)^2 a)`, increasing to `1/a`.
//! - Poisson factorial moment: ratio `lambda/(n-r+1)`, decreasing to 0.
//! - negative binomial with binomial thinning: ratio
//!   `(x+n+phi)/(n+1) * q (1-eta)` with `q = mu/(mu+phi)`; limit `q (1-eta)`,
//!   approached from above when `x + phi > 1` and from below when `x + phi < 1`.
//! - Erlang mixture and Bessel: ratio `c/(n(n+1))`-like, decreasing to 0.
//! - telescoping `1/((n+1)(n+2))`: ratio `(n+1)/(n+3)`, increasing to 1.

use crate::error::{domain, Result};
use crate::series::{RatioDirection, SeriesSpec};
use crate::special::{ln_factorial, ln_gamma};

use super::dist::{binomial_ln_pmf, negbin_ln_pmf, CountDistribution};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        domain(format!("{name} must lie in (0, 1), got {v}"))
    }
}

/// `n ln x`, with `0 * ln 0 = 0`.
#[inline]
fn n_ln(n: u64, ln_x: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * ln_x
    }
}

pub fn comp_log_term(n: u64, mu: f64, nu: f64) -> f64 {
    n_ln(n, mu.ln()) - nu * ln_factorial(n)
}

pub fn comp_reparam_log_term(n: u64, mu: f64, nu: f64) -> f64 {
    nu * (n_ln(n, mu.ln()) - ln_factorial(n))
}

pub fn double_poisson_log_term(n: u64, mu: f64, phi: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    -nf + nf * ln_n - ln_factorial(n) + phi * nf * (1.0 + mu.ln() - ln_n)
}

pub fn power_geometric_log_term(n: u64, a: f64) -> f64 {
    let m = n as f64 + 1.0;
    -2.0 * m.ln() - m * a.ln()
}

pub fn poisson_factorial_moment_log_term(n: u64, lambda: f64, r: u64) -> f64 {
    if n < r {
        return f64::NEG_INFINITY;
    }
    n_ln(n, lambda.ln()) - lambda - ln_factorial(n - r)
}

pub fn negbin_marginal_log_term(n: u64, x: u64, mu: f64, phi: f64, eta: f64) -> f64 {
    let y = x + n;
    negbin_ln_pmf(y, mu, phi) + binomial_ln_pmf(x, y, eta)
}

pub fn sentinel_rho0_log_term(n: u64, base: &CountDistribution, eta: f64) -> f64 {
    base.ln_pmf(n) + n_ln(n, (-eta).ln_1p())
}

/// Term of `E[Y (1-eta)^Y]`.
pub fn sentinel_moment_log_term(n: u64, base: &CountDistribution, eta: f64) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    (n as f64).ln() + sentinel_rho0_log_term(n, base, eta)
}

pub fn erlang_full_log_term(n: u64, x: f64, mu: f64, beta: f64) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    -(mu + beta * x) - crate::logspace::log1mexp(-mu) - x.ln() + nf * (mu * x * beta).ln()
        - ln_factorial(n)
        - ln_factorial(n - 1)
}

pub fn bessel_i_log_term(k: u64, v: f64, z: f64) -> f64 {
    let kf = k as f64;
    v * (z / 2.0).ln() + n_ln(k, 2.0 * (z / 2.0).ln()) - ln_factorial(k) - ln_gamma(v + kf + 1.0)
}

pub fn telescoping_log_term(n: u64) -> f64 {
    let m = n as f64;
    -(m + 1.0).ln() - (m + 2.0).ln()
}

pub fn geometric_log_term(n: u64, r: f64) -> f64 {
    n_ln(n, r.ln())
}

pub fn comp(mu: f64, nu: f64) -> Result<SeriesSpec> {
    positive("mu", mu)?;
    positive("nu", nu)?;
    Ok(SeriesSpec::new(move |n| comp_log_term(n, mu, nu))
        .with_ratio_limit(0.0, RatioDirection::DecreasesToL)
        .monotone(mu <= 1.0))
}

pub fn comp_reparam(mu: f64, nu: f64) -> Result<SeriesSpec> {
    positive("mu", mu)?;
    positive("nu", nu)?;
    Ok(SeriesSpec::new(move |n| comp_reparam_log_term(n, mu, nu))
        .with_ratio_limit(0.0, RatioDirection::DecreasesToL)
        .monotone(mu <= 1.0))
}

pub fn double_poisson(mu: f64, phi: f64) -> Result<SeriesSpec> {
    positive("mu", mu)?;
    positive("phi", phi)?;
    Ok(SeriesSpec::new(move |n| double_poisson_log_term(n, mu, phi))
        .with_ratio_limit(0.0, RatioDirection::DecreasesToL))
}

pub fn power_geometric(a: f64) -> Result<SeriesSpec> {
    if !(a > 1.0 && a.is_finite()) {
        return domain(format!("a must exceed 1, got {a}"));
    }
    Ok(SeriesSpec::new(move |n| power_geometric_log_term(n, a))
        .with_ratio_limit(1.0 / a, RatioDirection::IncreasesToL)
        .monotone(true))
}

pub fn poisson_factorial_moment(lambda: f64, r: u64) -> Result<SeriesSpec> {
    positive("lambda", lambda)?;
    if r < 1 {
        return domain("moment order r must be at least 1");
    }
    Ok(SeriesSpec::new(move |n| poisson_factorial_moment_log_term(n, lambda, r))
        .with_ratio_limit(0.0, RatioDirection::DecreasesToL)
        .with_offset(r)
        .monotone(lambda <= 1.0))
}

pub fn negbin_marginal(x: u64, mu: f64, phi: f64, eta: f64) -> Result<SeriesSpec> {
    positive("mu", mu)?;
    positive("phi", phi)?;
    open_unit("eta", eta)?;
    let l = mu / (mu + phi) * (1.0 - eta);
    let lead = x as f64 + phi;
    let direction = if lead > 1.0 {
        RatioDirection::DecreasesToL
    } else {
        RatioDirection::IncreasesToL
    };
    // the largest ratio is the first one when decreasing, L otherwise
    let monotone = if lead > 1.0 { lead * l <= 1.0 } else { true };
    Ok(SeriesSpec::new(move |n| negbin_marginal_log_term(n, x, mu, phi, eta))
        .with_ratio_limit(l, direction)
        .monotone(monotone))
}

fn base_direction(base: &CountDistribution) -> RatioDirection {
    match *base {
        CountDistribution::Poisson { .. } => RatioDirection::DecreasesToL,
        CountDistribution::NegBinomial { phi, .. } if phi >= 1.0 => RatioDirection::DecreasesToL,
        CountDistribution::NegBinomial { .. } => RatioDirection::IncreasesToL,
    }
}

/// Largest ratio `p(n+1)/p(n) (1-eta)` over `n >= 0`, times `(n+1)/n` for the
/// moment series when `with_n` is set (bounded crudely by doubling).
fn base_monotone(base: &CountDistribution, eta: f64, with_n: bool) -> bool {
    let first = match *base {
        CountDistribution::Poisson { lambda } => lambda,
        CountDistribution::NegBinomial { mu, phi } => phi.max(1.0) * mu / (mu + phi),
    } * (1.0 - eta);
    if with_n {
        2.0 * first <= 1.0
    } else {
        first <= 1.0
    }
}

pub fn sentinel_rho0(base: CountDistribution, eta: f64) -> Result<SeriesSpec> {
    open_unit("eta", eta)?;
    Ok(SeriesSpec::new(move |n| sentinel_rho0_log_term(n, &base, eta))
        .with_ratio_limit(base.ratio_limit() * (1.0 - eta), base_direction(&base))
        .monotone(base_monotone(&base, eta, false)))
}

pub fn sentinel_moment(base: CountDistribution, eta: f64) -> Result<SeriesSpec> {
    open_unit("eta", eta)?;
    let direction = match base {
        CountDistribution::Poisson { .. } => RatioDirection::DecreasesToL,
        _ => RatioDirection::Unknown,
    };
    Ok(SeriesSpec::new(move |n| sentinel_moment_log_term(n, &base, eta))
        .with_ratio_limit(base.ratio_limit() * (1.0 - eta), direction)
        .with_offset(1)
        .monotone(base_monotone(&base, eta, true)))
}

pub fn erlang_full(x: f64, mu: f64, beta: f64) -> Result<SeriesSpec> {
    positive("x", x)?;
    positive("mu", mu)?;
    positive("beta", beta)?;
    Ok(SeriesSpec::new(move |n| erlang_full_log_term(n, x, mu, beta))
        .with_ratio_limit(0.0, RatioDirection::DecreasesToL)
        .with_offset(1)
        .monotone(mu * beta * x <= 2.0))
}

pub fn bessel_i(v: f64, z: f64) -> Result<SeriesSpec> {
    if !(v >= 0.0 && v.is_finite()) {
        return domain(format!("order v must be non-negative, got {v}"));
    }
    positive("z", z)?;
    Ok(SeriesSpec::new(move |k| bessel_i_log_term(k, v, z))
        .with_ratio_limit(0.0, RatioDirection::DecreasesToL)
        .monotone(z * z / 4.0 <= v + 1.0))
}

pub fn telescoping() -> SeriesSpec {
    SeriesSpec::new(telescoping_log_term)
        .with_ratio_limit(1.0, RatioDirection::IncreasesToL)
        .monotone(true)
}

pub fn geometric(r: f64) -> Result<SeriesSpec> {
    open_unit("r", r)?;
    Ok(SeriesSpec::new(move |n| geometric_log_term(n, r))
        .with_ratio_limit(r, RatioDirection::DecreasesToL)
        .monotone(true))
}
