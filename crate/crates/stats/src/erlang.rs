//! Marginal likelihood of the Erlang queueing model: `Y` zero-truncated
//! Poisson(mu) calls, each lasting Exp(beta), only the total `X` observed.
//!
//! With `c = mu beta x` the density is
//! `f(x) = e^{-(mu + beta x)} / ((1 - e^{-mu}) x) * sum_{n>=1} c^n / (n! (n-1)!)`
//! and the sum equals `sqrt(c) I_1(2 sqrt(c))`. The tolerance of adaptive
//! truncation applies to that sum, not to the density: densities at large
//! `mu` sit far below any absolute tolerance.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use infsum::catalog::terms::bessel_i;
use infsum::logspace::SignedLog;
use infsum::special::ln_factorial;
use infsum::{
    fixed_cap, log1mexp, truncate, LogValue, Method, RatioDirection, SeriesSpec, TruncationConfig,
    TruncationResult, MACHINE_EPSILON,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{arg, Result, StatsError};

/// 97.5% standard normal quantile.
const Z_975: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Representation {
    /// Sum over the number of calls.
    Full,
    /// Closed form through the power series of `I_1`.
    Bessel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErlangTruncation {
    /// Exactly `K` terms.
    Fixed(usize),
    /// Sum-to-threshold with `M = 1/2`.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangOptions {
    pub representation: Representation,
    pub truncation: ErlangTruncation,
    pub epsilon: f64,
    pub max_terms: usize,
}

impl Default for ErlangOptions {
    fn default() -> Self {
        ErlangOptions {
            representation: Representation::Full,
            truncation: ErlangTruncation::Adaptive,
            epsilon: MACHINE_EPSILON,
            max_terms: 1_000_000,
        }
    }
}

impl ErlangOptions {
    pub fn new(representation: Representation, truncation: ErlangTruncation) -> Self {
        ErlangOptions { representation, truncation, ..Default::default() }
    }
}

fn check(x: &[f64], mu: f64, beta: f64) -> Result<()> {
    if x.is_empty() {
        return Err(StatsError::Data("no observations".into()));
    }
    if let Some(bad) = x.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(StatsError::Data(format!("durations must be positive, got {bad}")));
    }
    if !(mu > 0.0 && mu.is_finite() && beta > 0.0 && beta.is_finite()) {
        return arg(format!("mu and beta must be positive, got mu={mu}, beta={beta}"));
    }
    Ok(())
}

/// `sum_{n>=1} n^k c^n / (n! (n-1)!)` as a series.
fn shape_series(c: f64, k: u32) -> SeriesSpec {
    let ln_c = c.ln();
    let kf = k as f64;
    SeriesSpec::new(move |n| {
        if n == 0 {
            return f64::NEG_INFINITY;
        }
        let nf = n as f64;
        kf * nf.ln() + nf * ln_c - ln_factorial(n) - ln_factorial(n - 1)
    })
    .with_ratio_limit(0.0, RatioDirection::DecreasesToL)
    .with_offset(1)
    // ratios are (1 + 1/n)^k c / (n (n+1)), largest at n = 1
    .monotone(2f64.powi(k as i32) * c <= 2.0)
}

fn run(series: &SeriesSpec, opts: &ErlangOptions, epsilon: f64) -> Result<TruncationResult> {
    let r = match opts.truncation {
        ErlangTruncation::Fixed(k) => {
            if k == 0 {
                return arg("fixed truncation needs at least one term");
            }
            fixed_cap(series, k - 1)?
        }
        ErlangTruncation::Adaptive => {
            let cfg = TruncationConfig::new(Method::SumToThreshold, epsilon).with_max_terms(opts.max_terms);
            truncate(series, &cfg)?
        }
    };
    if !r.converged {
        return Err(StatsError::NotConverged { n_evaluations: r.n_evaluations, last_index: r.last_index });
    }
    Ok(r)
}

/// `ln` of the factor outside the sum.
fn ln_prefactor(x: f64, mu: f64, beta: f64) -> f64 {
    -(mu + beta * x) - log1mexp(-mu) - x.ln()
}

/// `ln f(x | mu, beta)` for one observation, with the number of terms used.
pub fn erlang_log_density(x: f64, mu: f64, beta: f64, opts: &ErlangOptions) -> Result<(f64, usize)> {
    check(&[x], mu, beta)?;
    let c = mu * beta * x;
    let (ln_sum, n) = match opts.representation {
        Representation::Full => {
            let r = run(&shape_series(c, 0), opts, opts.epsilon)?;
            (r.log_sum.ln(), r.n_evaluations)
        }
        Representation::Bessel => {
            let r = run(&bessel_i(1.0, 2.0 * c.sqrt())?, opts, opts.epsilon)?;
            (0.5 * c.ln() + r.log_sum.ln(), r.n_evaluations)
        }
    };
    Ok((ln_prefactor(x, mu, beta) + ln_sum, n))
}

/// `sum_i ln f(x_i | mu, beta)`.
pub fn erlang_marginal_loglik(x: &[f64], mu: f64, beta: f64, opts: &ErlangOptions) -> Result<f64> {
    check(x, mu, beta)?;
    let mut total = 0.0;
    for &xi in x {
        total += erlang_log_density(xi, mu, beta, opts)?.0;
    }
    Ok(total)
}

/// Moments of the number of calls given one observation, from the three
/// positive sums `A_k = sum n^k c^n / (n! (n-1)!)`.
struct CallMoments {
    mean: f64,
    second: f64,
    var: f64,
}

fn call_moments(c: f64, opts: &ErlangOptions) -> Result<CallMoments> {
    let eps = opts.epsilon / 4.0;
    let a: Vec<LogValue> = (0..3)
        .map(|k| run(&shape_series(c, k), opts, eps).map(|r| r.log_sum))
        .collect::<Result<_>>()?;
    let (a0, a1, a2) = (a[0].ln(), a[1].ln(), a[2].ln());
    // A0 A2 - A1^2 >= 0, taken as a difference in log-space
    let d = SignedLog::difference(LogValue::new(a0 + a2), LogValue::new(2.0 * a1));
    let var = if d.magnitude.is_zero() {
        0.0
    } else {
        let v = (d.magnitude.ln() - 2.0 * a0).exp();
        if d.negative {
            -v
        } else {
            v
        }
    };
    Ok(CallMoments { mean: (a1 - a0).exp(), second: (a2 - a0).exp(), var })
}

pub type Matrix2 = [[f64; 2]; 2];

/// Second derivatives of the log-likelihood in `(mu, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErlangHessian {
    pub matrix: Matrix2,
    /// Same quantities assembled from the textbook-style derivative series
    /// taken literally: Poisson weights without the zero-truncation factor,
    /// `p'' = p ((mu - n)^2 / mu^2 - 1 / mu)`, and the mixed derivative of
    /// the density replaced by `f_mu + f_beta`. Kept for comparison only.
    pub displayed: Matrix2,
}

/// Analytic Hessian of [`erlang_marginal_loglik`].
///
/// Per observation, with `n` the call count weighted by
/// `p(n | mu) f(x | n, beta)`:
/// `d2/dmu2 = (Var n - E n) / mu^2 + e^{-mu} / (1 - e^{-mu})^2`,
/// `d2/dbeta2 = (Var n - E n) / beta^2`, `d2/dmu dbeta = Var n / (mu beta)`.
/// Each `A_k` is truncated at `epsilon / 4`.
pub fn erlang_hessian(x: &[f64], mu: f64, beta: f64, opts: &ErlangOptions) -> Result<ErlangHessian> {
    check(x, mu, beta)?;
    let mut h = [[0.0; 2]; 2];
    let mut d = [[0.0; 2]; 2];
    let normaliser = (-mu - 2.0 * log1mexp(-mu)).exp();
    for &xi in x {
        let m = call_moments(mu * beta * xi, opts)?;
        h[0][0] += (m.var - m.mean) / (mu * mu) + normaliser;
        h[1][1] += (m.var - m.mean) / (beta * beta);
        h[0][1] += m.var / (mu * beta);

        let r10 = m.mean / mu - 1.0;
        let r01 = m.mean / beta - xi;
        let r20 = (mu * mu - 2.0 * mu * m.mean + m.second) / (mu * mu) - 1.0 / mu;
        let xb = xi * beta;
        let r02 = (xb * xb - 2.0 * xb * m.mean + m.second - m.mean) / (beta * beta);
        d[0][0] += r20 - r10 * r10;
        d[1][1] += r02 - r01 * r01;
        d[0][1] += (r10 + r01) - r10 * r01;
    }
    h[1][0] = h[0][1];
    d[1][0] = d[0][1];
    Ok(ErlangHessian { matrix: h, displayed: d })
}

/// Central finite-difference Hessian of `f` at `(a, b)` with steps
/// `rel_step * a` and `rel_step * b`.
pub fn fd_hessian<F>(f: F, a: f64, b: f64, rel_step: f64) -> Result<Matrix2>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let (ha, hb) = (rel_step * a, rel_step * b);
    let f0 = f(a, b)?;
    let faa = (f(a + ha, b)? - 2.0 * f0 + f(a - ha, b)?) / (ha * ha);
    let fbb = (f(a, b + hb)? - 2.0 * f0 + f(a, b - hb)?) / (hb * hb);
    let fab = (f(a + ha, b + hb)? - f(a + ha, b - hb)? - f(a - ha, b + hb)? + f(a - ha, b - hb)?) / (4.0 * ha * hb);
    Ok([[faa, fab], [fab, fbb]])
}

/// Finite-difference Hessian of the marginal log-likelihood.
pub fn erlang_fd_hessian(x: &[f64], mu: f64, beta: f64, opts: &ErlangOptions, rel_step: f64) -> Result<Matrix2> {
    fd_hessian(|m, b| erlang_marginal_loglik(x, m, b, opts), mu, beta, rel_step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Wald intervals from the inverse of `-H`; `None` unless `H` is negative
/// definite. At an interior optimum this is the delta-method interval for
/// the natural parameters of a fit done on the log scale.
pub fn wald_intervals(h: &Matrix2, mu: f64, beta: f64) -> Option<(Interval, Interval)> {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if !(h[0][0] < 0.0 && det > 0.0) {
        return None;
    }
    let var_mu = -h[1][1] / det;
    let var_beta = -h[0][0] / det;
    let ci = |v: f64, var: f64| {
        let w = Z_975 * var.sqrt();
        Interval { lower: v - w, upper: v + w }
    };
    Some((ci(mu, var_mu), ci(beta, var_beta)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmleOptions {
    pub loglik: ErlangOptions,
    /// Starting `(mu, beta)`; moment estimates when absent.
    pub init: Option<(f64, f64)>,
    pub max_iters: u64,
    /// Extra simplex restarts from the best point.
    pub restarts: usize,
    /// Spread of the starting simplex on the log scale.
    pub initial_step: f64,
    /// Also compute the finite-difference Hessian and its intervals.
    pub numerical_hessian: bool,
    pub fd_step: f64,
}

impl Default for MmleOptions {
    fn default() -> Self {
        MmleOptions {
            loglik: ErlangOptions::default(),
            init: None,
            max_iters: 1000,
            restarts: 2,
            initial_step: 0.1,
            numerical_hessian: false,
            fd_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErlangMmleResult {
    pub mu_hat: f64,
    pub beta_hat: f64,
    pub loglik: f64,
    pub hessian: Matrix2,
    pub ci_mu: Option<Interval>,
    pub ci_beta: Option<Interval>,
    pub hessian_fd: Option<Matrix2>,
    pub ci_mu_fd: Option<Interval>,
    pub ci_beta_fd: Option<Interval>,
    pub n_optimizer_evals: u64,
    pub representation: Representation,
    pub truncation: ErlangTruncation,
}

/// Starting values ignoring the zero truncation: `E X = mu / beta` and
/// `Var X = 2 mu / beta^2`.
pub fn moment_estimates(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0).max(1.0);
    if v > 0.0 && v.is_finite() {
        let beta = 2.0 * m / v;
        (m * beta, beta)
    } else {
        (1.0, 1.0 / m)
    }
}

struct NegLoglik<'a> {
    x: &'a [f64],
    opts: &'a ErlangOptions,
}

impl CostFunction for NegLoglik<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(match erlang_marginal_loglik(self.x, p[0].exp(), p[1].exp(), self.opts) {
            Ok(l) if l.is_finite() => -l,
            _ => f64::INFINITY,
        })
    }
}

/// Maximum marginal likelihood by Nelder-Mead on `(ln mu, ln beta)`, with
/// Wald intervals from [`erlang_hessian`].
pub fn erlang_mmle(x: &[f64], options: &MmleOptions) -> Result<ErlangMmleResult> {
    let (mu0, beta0) = options.init.unwrap_or_else(|| moment_estimates(x));
    check(x, mu0, beta0)?;
    let mut best = vec![mu0.ln(), beta0.ln()];
    let mut best_cost = f64::INFINITY;
    let mut evals = 0u64;
    let mut converged = false;
    for _ in 0..=options.restarts {
        let s = options.initial_step;
        let simplex = vec![best.clone(), vec![best[0] + s, best[1]], vec![best[0], best[1] + s]];
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-10)
            .map_err(|e| StatsError::Optimizer(e.to_string()))?;
        let problem = NegLoglik { x, opts: &options.loglik };
        let res = Executor::new(problem, solver)
            .configure(|st| st.max_iters(options.max_iters))
            .run()
            .map_err(|e| StatsError::Optimizer(e.to_string()))?;
        let st = res.state();
        evals += st.get_func_counts().get("cost_count").copied().unwrap_or(0);
        let cost = st.get_best_cost();
        let param = st.get_best_param().cloned().unwrap_or_else(|| best.clone());
        let stalled = best_cost - cost <= 1e-9 * cost.abs().max(1.0);
        converged = matches!(
            st.get_termination_status(),
            TerminationStatus::Terminated(TerminationReason::SolverConverged)
        );
        if cost < best_cost {
            best_cost = cost;
            best = param;
        }
        if converged && stalled {
            break;
        }
    }
    if !converged || !best_cost.is_finite() {
        return Err(StatsError::Optimizer(format!(
            "simplex did not converge after {} restarts",
            options.restarts
        )));
    }
    let (mu, beta) = (best[0].exp(), best[1].exp());
    let hessian = erlang_hessian(x, mu, beta, &options.loglik)?.matrix;
    let cis = wald_intervals(&hessian, mu, beta);
    let (hessian_fd, cis_fd) = if options.numerical_hessian {
        let h = erlang_fd_hessian(x, mu, beta, &options.loglik, options.fd_step)?;
        (Some(h), wald_intervals(&h, mu, beta))
    } else {
        (None, None)
    };
    Ok(ErlangMmleResult {
        mu_hat: mu,
        beta_hat: beta,
        loglik: -best_cost,
        hessian,
        ci_mu: cis.map(|c| c.0),
        ci_beta: cis.map(|c| c.1),
        hessian_fd,
        ci_mu_fd: cis_fd.map(|c| c.0),
        ci_beta_fd: cis_fd.map(|c| c.1),
        n_optimizer_evals: evals,
        representation: options.loglik.representation,
        truncation: options.loglik.truncation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateFit {
    pub replicate: usize,
    pub mu_hat: f64,
    pub beta_hat: f64,
    pub ci_mu: Option<Interval>,
    pub ci_beta: Option<Interval>,
    pub ci_mu_fd: Option<Interval>,
    pub ci_beta_fd: Option<Interval>,
    pub n_optimizer_evals: u64,
    pub error: Option<String>,
}

/// RMSE and interval coverage over the successful fits of a study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudySummary {
    pub mu: f64,
    pub beta: f64,
    pub j: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    pub rmse_mu: f64,
    pub rmse_beta: f64,
    pub coverage_mu: f64,
    pub coverage_beta: f64,
    pub coverage_mu_fd: Option<f64>,
    pub coverage_beta_fd: Option<f64>,
}

/// Fits `replicates` simulated data sets of size `j`. Replicate `r` draws
/// its data from stream `r` of a generator seeded with `seed`, so studies
/// that differ only in `options` see the same data.
pub fn mmle_study(
    mu: f64,
    beta: f64,
    j: usize,
    replicates: usize,
    seed: u64,
    options: &MmleOptions,
) -> Result<(Vec<ReplicateFit>, StudySummary)> {
    if j == 0 || replicates == 0 {
        return arg("need at least one observation and one replicate");
    }
    let fits: Vec<ReplicateFit> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let x = simulate_erlang(mu, beta, j, &mut rng)?;
            Ok(match erlang_mmle(&x, options) {
                Ok(f) => ReplicateFit {
                    replicate: r,
                    mu_hat: f.mu_hat,
                    beta_hat: f.beta_hat,
                    ci_mu: f.ci_mu,
                    ci_beta: f.ci_beta,
                    ci_mu_fd: f.ci_mu_fd,
                    ci_beta_fd: f.ci_beta_fd,
                    n_optimizer_evals: f.n_optimizer_evals,
                    error: None,
                },
                Err(e) => ReplicateFit {
                    replicate: r,
                    mu_hat: f64::NAN,
                    beta_hat: f64::NAN,
                    ci_mu: None,
                    ci_beta: None,
                    ci_mu_fd: None,
                    ci_beta_fd: None,
                    n_optimizer_evals: 0,
                    error: Some(e.to_string()),
                },
            })
        })
        .collect::<Result<_>>()?;
    let ok: Vec<&ReplicateFit> = fits.iter().filter(|f| f.error.is_none()).collect();
    let n = ok.len() as f64;
    let rmse = |g: fn(&ReplicateFit) -> f64, truth: f64| {
        (ok.iter().map(|f| (g(f) - truth).powi(2)).sum::<f64>() / n).sqrt()
    };
    let cover = |g: fn(&ReplicateFit) -> Option<Interval>, truth: f64| {
        ok.iter().filter(|f| g(f).is_some_and(|c| c.contains(truth))).count() as f64 / n
    };
    let summary = StudySummary {
        mu,
        beta,
        j,
        n_ok: ok.len(),
        n_failed: fits.len() - ok.len(),
        rmse_mu: rmse(|f| f.mu_hat, mu),
        rmse_beta: rmse(|f| f.beta_hat, beta),
        coverage_mu: cover(|f| f.ci_mu, mu),
        coverage_beta: cover(|f| f.ci_beta, beta),
        coverage_mu_fd: options.numerical_hessian.then(|| cover(|f| f.ci_mu_fd, mu)),
        coverage_beta_fd: options.numerical_hessian.then(|| cover(|f| f.ci_beta_fd, beta)),
    };
    Ok((fits, summary))
}

/// Zero-truncated Poisson draw.
pub fn sample_truncated_poisson<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> Result<u64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return arg(format!("mu must be positive, got {mu}"));
    }
    if mu < 1.0 {
        // inversion on p(n) / (1 - e^{-mu}), n >= 1
        let u: f64 = rng.random();
        let norm = -(-mu).exp_m1();
        let mut p = mu * (-mu).exp() / norm;
        let mut cdf = p;
        let mut n = 1u64;
        while u > cdf && p > 0.0 {
            n += 1;
            p *= mu / n as f64;
            cdf += p;
        }
        return Ok(n);
    }
    let pois = Poisson::new(mu).map_err(|e| StatsError::Argument(e.to_string()))?;
    loop {
        let y = pois.sample(rng) as u64;
        if y > 0 {
            return Ok(y);
        }
    }
}

/// `J` totals from the model.
pub fn simulate_erlang<R: Rng + ?Sized>(mu: f64, beta: f64, j: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return arg(format!("beta must be positive, got {beta}"));
    }
    (0..j)
        .map(|_| {
            let y = sample_truncated_poisson(mu, rng)?;
            let g = Gamma::new(y as f64, 1.0 / beta).map_err(|e| StatsError::Argument(e.to_string()))?;
            Ok(g.sample(rng))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(mu: f64, beta: f64, j: usize, seed: u64) -> Vec<f64> {
        simulate_erlang(mu, beta, j, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn representations_agree() {
        let full = ErlangOptions::new(Representation::Full, ErlangTruncation::Adaptive);
        let bessel = ErlangOptions::new(Representation::Bessel, ErlangTruncation::Adaptive);
        let (a, _) = erlang_log_density(120.0, 15.0, 0.1, &full).unwrap();
        let (b, _) = erlang_log_density(120.0, 15.0, 0.1, &bessel).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs(), "{a} {b}");
    }

    #[test]
    fn single_call_limit() {
        // c -> 0: only n = 1 matters and f is the exponential density
        let opts = ErlangOptions::default();
        let (mu, beta, x) = (1e-9, 2.0, 0.7);
        let (l, _) = erlang_log_density(x, mu, beta, &opts).unwrap();
        let want = beta.ln() - beta * x;
        assert!((l - want).abs() < 1e-8, "{l} {want}");
    }

    #[test]
    fn density_integrates_to_one() {
        let opts = ErlangOptions::default();
        let (mu, beta) = (3.0, 0.5);
        let h = 0.01;
        let total: f64 = (1..6000)
            .map(|i| {
                let x = (i as f64 - 0.5) * h;
                erlang_log_density(x, mu, beta, &opts).unwrap().0.exp() * h
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn fixed_cap_counts_terms() {
        let opts = ErlangOptions::new(Representation::Full, ErlangTruncation::Fixed(1000));
        let (_, n) = erlang_log_density(15000.0, 1500.0, 0.1, &opts).unwrap();
        assert_eq!(n, 1000);
        let opts = ErlangOptions::new(Representation::Bessel, ErlangTruncation::Fixed(1000));
        assert_eq!(erlang_log_density(15000.0, 1500.0, 0.1, &opts).unwrap().1, 1000);
    }

    #[test]
    fn hessian_symmetric_and_matches_fd() {
        let x = data(15.0, 0.1, 30, 7);
        let opts = ErlangOptions::default();
        let h = erlang_hessian(&x, 15.0, 0.1, &opts).unwrap();
        assert_eq!(h.matrix[0][1], h.matrix[1][0]);
        let fd = erlang_fd_hessian(&x, 15.0, 0.1, &opts, 1e-5).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let rel = (h.matrix[i][j] - fd[i][j]).abs() / fd[i][j].abs();
                assert!(rel < 1e-4, "({i},{j}) {} vs {}", h.matrix[i][j], fd[i][j]);
            }
        }
    }

    #[test]
    fn wald_needs_negative_definite() {
        assert!(wald_intervals(&[[1.0, 0.0], [0.0, -1.0]], 1.0, 1.0).is_none());
        let (a, b) = wald_intervals(&[[-4.0, 0.0], [0.0, -1.0]], 1.0, 2.0).unwrap();
        assert!((a.upper - 1.0 - Z_975 / 2.0).abs() < 1e-15);
        assert!(b.contains(2.0));
    }

    #[test]
    fn truncated_poisson_never_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mu in [0.01, 0.5, 3.0] {
            let draws: Vec<u64> = (0..2000).map(|_| sample_truncated_poisson(mu, &mut rng).unwrap()).collect();
            assert!(draws.iter().all(|&y| y >= 1));
            let mean = draws.iter().sum::<u64>() as f64 / 2000.0;
            let want = mu / -(-mu).exp_m1();
            assert!((mean - want).abs() < 0.1 * want, "{mu}: {mean} vs {want}");
        }
    }

    #[test]
    fn moment_start_is_close() {
        let x = data(150.0, 0.1, 200, 3);
        let (m, b) = moment_estimates(&x);
        assert!((m / 150.0 - 1.0).abs() < 0.3 && (b / 0.1 - 1.0).abs() < 0.3, "{m} {b}");
    }

    #[test]
    fn rejects_bad_input() {
        let opts = ErlangOptions::default();
        assert!(erlang_marginal_loglik(&[], 1.0, 1.0, &opts).is_err());
        assert!(erlang_marginal_loglik(&[-1.0], 1.0, 1.0, &opts).is_err());
        assert!(erlang_marginal_loglik(&[1.0], 1.0, 0.0, &opts).is_err());
    }
}
