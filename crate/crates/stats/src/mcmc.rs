//! Random-walk Metropolis for the COMP model on `(ln mu, ln nu)`, with the
//! likelihood's normalising constant truncated afresh at every proposal.

use infsum::special::ln_gamma;
use infsum::{Method, TruncationConfig, MACHINE_EPSILON};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comp::{comp_log_likelihood_summary, CountSummary};
use crate::diagnostics::{quantile, ParamSummary};
use crate::error::{arg, Result, StatsError};

/// Gamma density with shape and rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return arg(format!("gamma prior needs positive shape and rate, got ({shape}, {rate})"));
        }
        Ok(GammaPrior { shape, rate })
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * x.ln() - self.rate * x
    }

    /// Density of `ln X` at `t`, i.e. the pdf times the Jacobian `e^t`.
    pub fn ln_pdf_log_scale(&self, t: f64) -> f64 {
        self.shape * self.rate.ln() - ln_gamma(self.shape) + self.shape * t - self.rate * t.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompPosteriorConfig {
    pub prior_mu: GammaPrior,
    pub prior_nu: GammaPrior,
    pub epsilon: f64,
    pub method: Method,
    /// Term cap for each normalising constant; proposals that hit it are
    /// rejected.
    pub max_terms: usize,
    pub n_chains: usize,
    pub n_warmup: usize,
    pub n_samples: usize,
    /// Random-walk standard deviations for `ln mu` and `ln nu`.
    pub proposal_scales: (f64, f64),
    /// Tune a common scale factor during warmup towards the target rate.
    pub adapt: bool,
    pub target_acceptance: f64,
    pub seed: u64,
    /// Starting `(mu, nu)`; by default the sample mean and 1, jittered per chain.
    pub init: Option<(f64, f64)>,
}

impl Default for CompPosteriorConfig {
    fn default() -> Self {
        CompPosteriorConfig {
            prior_mu: GammaPrior { shape: 1.0, rate: 1.0 },
            prior_nu: GammaPrior { shape: 0.0625, rate: 0.25 },
            epsilon: MACHINE_EPSILON,
            method: Method::ErrorBoundingPairs,
            max_terms: 1_000_000,
            n_chains: 4,
            n_warmup: 1000,
            n_samples: 1000,
            proposal_scales: (0.1, 0.1),
            adapt: true,
            target_acceptance: 0.234,
            seed: 1,
            init: None,
        }
    }
}

impl CompPosteriorConfig {
    pub fn truncation(&self) -> TruncationConfig {
        TruncationConfig::new(self.method, self.epsilon).with_max_terms(self.max_terms)
    }

    fn validate(&self) -> Result<()> {
        if self.n_chains == 0 || self.n_samples < 4 {
            return arg("need at least one chain and four samples");
        }
        let (a, b) = self.proposal_scales;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return arg("proposal scales must be positive");
        }
        if !(self.epsilon > 0.0) {
            return arg("epsilon must be positive");
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return arg("target acceptance must lie in (0, 1)");
        }
        Ok(())
    }
}

/// One retained draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub chain: usize,
    pub iter: usize,
    pub mu: f64,
    pub nu: f64,
    /// Terms used for the normalising constant at this state.
    pub trunc_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStats {
    pub acceptance_rate: f64,
    /// Common multiplier on the proposal scales after warmup.
    pub scale_factor: f64,
    /// Proposals rejected because their likelihood could not be computed.
    pub failed_proposals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McmcSummary {
    pub mu: ParamSummary,
    pub nu: ParamSummary,
    pub median_truncation_n: f64,
    /// 2.5% and 97.5% quantiles of the truncation length.
    pub truncation_n_interval: (f64, f64),
    pub n_draws: usize,
    pub chains: Vec<ChainStats>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcOutput {
    pub summary: McmcSummary,
    /// Ordered by chain, then iteration.
    pub draws: Vec<Draw>,
}

struct State {
    log_mu: f64,
    log_nu: f64,
    log_target: f64,
    trunc_n: usize,
}

/// Log posterior on the log scale, with the truncation length used.
fn log_target(
    data: &CountSummary,
    cfg: &CompPosteriorConfig,
    tc: &TruncationConfig,
    log_mu: f64,
    log_nu: f64,
) -> Result<(f64, usize)> {
    let lik = comp_log_likelihood_summary(data, log_mu.exp(), log_nu.exp(), tc)?;
    let prior = cfg.prior_mu.ln_pdf_log_scale(log_mu) + cfg.prior_nu.ln_pdf_log_scale(log_nu);
    Ok((lik.loglik + prior, lik.truncation_n))
}

/// Metropolis log acceptance ratio for moving from `current` to `proposal`.
pub fn log_acceptance_ratio(
    counts: &[u64],
    config: &CompPosteriorConfig,
    current: (f64, f64),
    proposal: (f64, f64),
) -> Result<f64> {
    let data = CountSummary::of(counts)?;
    let tc = config.truncation();
    let (a, _) = log_target(&data, config, &tc, current.0.ln(), current.1.ln())?;
    let (b, _) = log_target(&data, config, &tc, proposal.0.ln(), proposal.1.ln())?;
    Ok(b - a)
}

fn run_chain(data: &CountSummary, cfg: &CompPosteriorConfig, chain: usize) -> Result<(Vec<Draw>, ChainStats)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let tc = cfg.truncation();
    let (mu0, nu0) = cfg.init.unwrap_or((data.mean().max(0.1), 1.0));
    let jitter = if cfg.init.is_some() { 0.0 } else { 0.5 };
    let mut start = None;
    for _ in 0..100 {
        let lm = mu0.ln() + jitter * rng.random_range(-1.0..1.0);
        let ln = nu0.ln() + jitter * rng.random_range(-1.0..1.0);
        if let Ok((lt, n)) = log_target(data, cfg, &tc, lm, ln) {
            if lt.is_finite() {
                start = Some(State { log_mu: lm, log_nu: ln, log_target: lt, trunc_n: n });
                break;
            }
        }
    }
    let mut state = start.ok_or_else(|| StatsError::Argument(format!("chain {chain}: no valid starting point")))?;

    let mut log_factor = 0.0f64;
    let mut accepted = 0usize;
    let mut failed = 0usize;
    let mut draws = Vec::with_capacity(cfg.n_samples);
    for it in 0..cfg.n_warmup + cfg.n_samples {
        let f = log_factor.exp();
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        let lm = state.log_mu + f * cfg.proposal_scales.0 * z1;
        let ln = state.log_nu + f * cfg.proposal_scales.1 * z2;
        let alpha = match log_target(data, cfg, &tc, lm, ln) {
            Ok((lt, n)) if lt.is_finite() => {
                let a = (lt - state.log_target).min(0.0);
                if u.ln() < a {
                    state = State { log_mu: lm, log_nu: ln, log_target: lt, trunc_n: n };
                    if it >= cfg.n_warmup {
                        accepted += 1;
                    }
                }
                a.exp()
            }
            _ => {
                failed += 1;
                0.0
            }
        };
        if it < cfg.n_warmup {
            if cfg.adapt {
                log_factor += (alpha - cfg.target_acceptance) / ((it + 1) as f64).powf(0.6);
            }
        } else {
            draws.push(Draw {
                chain,
                iter: it - cfg.n_warmup,
                mu: state.log_mu.exp(),
                nu: state.log_nu.exp(),
                trunc_n: state.trunc_n,
            });
        }
    }
    let stats = ChainStats {
        acceptance_rate: accepted as f64 / cfg.n_samples as f64,
        scale_factor: log_factor.exp(),
        failed_proposals: failed,
    };
    Ok((draws, stats))
}

/// Runs `n_chains` chains in parallel; output does not depend on the thread
/// count.
pub fn comp_noisy_metropolis(counts: &[u64], config: &CompPosteriorConfig) -> Result<McmcOutput> {
    config.validate()?;
    let data = CountSummary::of(counts)?;
    let runs: Vec<(Vec<Draw>, ChainStats)> = (0..config.n_chains)
        .into_par_iter()
        .map(|c| run_chain(&data, config, c))
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    for (c, (_, s)) in runs.iter().enumerate() {
        if s.acceptance_rate < 0.01 {
            warnings.push(format!("chain {c}: acceptance rate {:.4} below 1%", s.acceptance_rate));
        }
    }
    let mu_chains: Vec<Vec<f64>> = runs.iter().map(|(d, _)| d.iter().map(|x| x.mu).collect()).collect();
    let nu_chains: Vec<Vec<f64>> = runs.iter().map(|(d, _)| d.iter().map(|x| x.nu).collect()).collect();
    let trunc: Vec<f64> = runs.iter().flat_map(|(d, _)| d.iter().map(|x| x.trunc_n as f64)).collect();
    let summary = McmcSummary {
        mu: ParamSummary::from_chains(&mu_chains),
        nu: ParamSummary::from_chains(&nu_chains),
        median_truncation_n: quantile(&trunc, 0.5),
        truncation_n_interval: (quantile(&trunc, 0.025), quantile(&trunc, 0.975)),
        n_draws: trunc.len(),
        chains: runs.iter().map(|(_, s)| s.clone()).collect(),
        warnings,
    };
    Ok(McmcOutput { summary, draws: runs.into_iter().flat_map(|(d, _)| d).collect() })
}
