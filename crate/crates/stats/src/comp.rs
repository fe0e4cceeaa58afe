//! COMP log-likelihood with an adaptively truncated normalising constant.

use infsum::catalog::terms::comp_reparam;
use infsum::special::ln_factorial;
use infsum::{truncate, TruncationConfig};
use serde::Serialize;

use crate::error::{arg, Result, StatsError};

/// Counts reduced to what the likelihood needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountSummary {
    pub n: usize,
    pub sum: f64,
    pub sum_ln_factorial: f64,
}

impl CountSummary {
    pub fn of(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(StatsError::Data("no observations".into()));
        }
        Ok(CountSummary {
            n: counts.len(),
            sum: counts.iter().map(|&y| y as f64).sum(),
            sum_ln_factorial: counts.iter().map(|&y| ln_factorial(y)).sum(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompLikelihood {
    pub loglik: f64,
    /// Terms used for `ln Z`.
    pub truncation_n: usize,
}

/// `sum_i nu (y_i ln mu - ln y_i!) - J ln Z(mu, nu)` with
/// `Z = sum_n (mu^n / n!)^nu` truncated by `config`.
pub fn comp_log_likelihood(counts: &[u64], mu: f64, nu: f64, config: &TruncationConfig) -> Result<CompLikelihood> {
    comp_log_likelihood_summary(&CountSummary::of(counts)?, mu, nu, config)
}

pub fn comp_log_likelihood_summary(
    data: &CountSummary,
    mu: f64,
    nu: f64,
    config: &TruncationConfig,
) -> Result<CompLikelihood> {
    if !(mu > 0.0 && mu.is_finite() && nu > 0.0 && nu.is_finite()) {
        return arg(format!("mu and nu must be positive, got mu={mu}, nu={nu}"));
    }
    let z = truncate(&comp_reparam(mu, nu)?, config)?;
    if !z.converged {
        return Err(StatsError::NotConverged { n_evaluations: z.n_evaluations, last_index: z.last_index });
    }
    let kernel = if data.sum == 0.0 { 0.0 } else { data.sum * mu.ln() };
    Ok(CompLikelihood {
        loglik: nu * (kernel - data.sum_ln_factorial) - data.n as f64 * z.log_sum.ln(),
        truncation_n: z.n_evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use infsum::Method;

    #[test]
    fn poisson_at_zero() {
        let cfg = TruncationConfig::new(Method::Auto, f64::EPSILON);
        let l = comp_log_likelihood(&[0], 1.0, 1.0, &cfg).unwrap();
        assert!((l.loglik + 1.0).abs() < 1e-15);
    }

    #[test]
    fn nu_one_is_poisson() {
        let y = [0u64, 3, 1, 7, 2, 2];
        let mu = 2.7f64;
        let cfg = TruncationConfig::new(Method::ErrorBoundingPairs, f64::EPSILON);
        let got = comp_log_likelihood(&y, mu, 1.0, &cfg).unwrap().loglik;
        let want: f64 = y.iter().map(|&k| k as f64 * mu.ln() - mu - ln_factorial(k)).sum();
        assert!((got - want).abs() < 1e-13 * want.abs());
    }

    #[test]
    fn comp_reference_count() {
        let cfg = TruncationConfig::new(Method::SumToThreshold, f64::EPSILON).strict(false);
        let l = comp_log_likelihood(&[4, 12], 10.0, 0.1, &cfg).unwrap();
        assert!((186..=188).contains(&l.truncation_n), "{}", l.truncation_n);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = TruncationConfig::default();
        assert!(comp_log_likelihood(&[], 1.0, 1.0, &cfg).is_err());
        assert!(comp_log_likelihood(&[1], 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn cap_out_is_an_error() {
        let cfg = TruncationConfig::new(Method::SumToThreshold, f64::EPSILON).with_max_terms(10);
        assert!(matches!(
            comp_log_likelihood(&[1], 50.0, 0.5, &cfg),
            Err(StatsError::NotConverged { .. })
        ));
    }
}
