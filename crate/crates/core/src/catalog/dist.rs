//! Count distributions used as bases for observation-error series.

use crate::error::{domain, Result};
use crate::special::{ln_factorial, ln_gamma, ln_gamma_ratio};

/// `ln` of the negative binomial pmf with mean `mu` and size `phi`.
pub fn negbin_ln_pmf(y: u64, mu: f64, phi: f64) -> f64 {
    let yf = y as f64;
    let ln_p = -(mu / phi).ln_1p();
    let y_part = if y == 0 { 0.0 } else { -yf * (phi / mu).ln_1p() };
    // ln G(y+phi) - ln G(phi) - ln y!, split so neither big log-gamma is formed
    let coef = if y == 0 { 0.0 } else { ln_gamma_ratio(yf + 1.0, phi - 1.0) - ln_gamma(phi) };
    coef + phi * ln_p + y_part
}

pub fn poisson_ln_pmf(y: u64, lambda: f64) -> f64 {
    let yf = y as f64;
    let y_part = if y == 0 { 0.0 } else { yf * lambda.ln() };
    y_part - lambda - ln_factorial(y)
}

/// `ln` of the binomial pmf `C(n, k) p^k (1-p)^(n-k)`, `-inf` outside the support.
pub fn binomial_ln_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let kf = k as f64;
    let rest = (n - k) as f64;
    let hits = if k == 0 { 0.0 } else { kf * p.ln() };
    let misses = if n == k { 0.0 } else { rest * (-p).ln_1p() };
    ln_gamma_ratio((n - k) as f64 + 1.0, kf) - ln_factorial(k) + hits + misses
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountDistribution {
    Poisson { lambda: f64 },
    /// Mean `mu`, size `phi`: variance `mu + mu^2 / phi`.
    NegBinomial { mu: f64, phi: f64 },
}

impl CountDistribution {
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("Poisson rate must be positive, got {lambda}"));
        }
        Ok(CountDistribution::Poisson { lambda })
    }

    pub fn negbin(mu: f64, phi: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite() && phi > 0.0 && phi.is_finite()) {
            return domain(format!("negative binomial needs mu > 0 and phi > 0, got mu={mu}, phi={phi}"));
        }
        Ok(CountDistribution::NegBinomial { mu, phi })
    }

    pub fn ln_pmf(&self, y: u64) -> f64 {
        match *self {
            CountDistribution::Poisson { lambda } => poisson_ln_pmf(y, lambda),
            CountDistribution::NegBinomial { mu, phi } => negbin_ln_pmf(y, mu, phi),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CountDistribution::Poisson { lambda } => lambda,
            CountDistribution::NegBinomial { mu, .. } => mu,
        }
    }

    /// `lim p(y+1)/p(y)`.
    pub fn ratio_limit(&self) -> f64 {
        match *self {
            CountDistribution::Poisson { .. } => 0.0,
            CountDistribution::NegBinomial { mu, phi } => mu / (mu + phi),
        }
    }

    /// `ln E[s^Y]` for `0 <= s <= 1`.
    pub fn ln_pgf(&self, s: f64) -> f64 {
        match *self {
            CountDistribution::Poisson { lambda } => lambda * (s - 1.0),
            CountDistribution::NegBinomial { mu, phi } => phi * (phi / (phi + mu * (1.0 - s))).ln(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmfs_normalise() {
        let p: f64 = (0..200).map(|y| poisson_ln_pmf(y, 7.5).exp()).sum();
        assert!((p - 1.0).abs() < 1e-14);
        let nb: f64 = (0..5000).map(|y| negbin_ln_pmf(y, 3.0, 0.7).exp()).sum();
        assert!((nb - 1.0).abs() < 1e-13);
        let b: f64 = (0..=12).map(|k| binomial_ln_pmf(k, 12, 0.3).exp()).sum();
        assert!((b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negbin_geometric_case() {
        // phi = 1 is geometric with success prob 1/(1+mu)
        for y in 0..10u64 {
            let want = (1.0 / 3.0) * (2.0f64 / 3.0).powi(y as i32);
            assert!((negbin_ln_pmf(y, 2.0, 1.0).exp() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial_ln_pmf(3, 2, 0.5), f64::NEG_INFINITY);
        assert!((binomial_ln_pmf(0, 0, 0.5)).abs() < 1e-15);
    }

    #[test]
    fn pgf_at_one() {
        assert_eq!(CountDistribution::negbin(2.0, 3.0).unwrap().ln_pgf(1.0), 0.0);
        assert!(CountDistribution::poisson(0.0).is_err());
    }
}
