//! Posterior summaries and convergence diagnostics for multi-chain draws:
//! rank-normalised split R-hat, bulk ESS and the Monte Carlo standard error
//! of the mean.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    /// Central 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub mcse: f64,
    /// Bulk effective sample size.
    pub ess: f64,
    pub rhat: f64,
}

impl ParamSummary {
    pub fn from_chains(chains: &[Vec<f64>]) -> Self {
        let all: Vec<f64> = chains.iter().flatten().copied().collect();
        let n = all.len() as f64;
        let mean = all.iter().sum::<f64>() / n;
        let var = all.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        let mut sorted = all.clone();
        sorted.sort_by(f64::total_cmp);
        let split = split_chains(chains);
        let ess_mean = ess(&split);
        ParamSummary {
            mean,
            median: quantile_sorted(&sorted, 0.5),
            sd: var.sqrt(),
            ci_low: quantile_sorted(&sorted, 0.025),
            ci_high: quantile_sorted(&sorted, 0.975),
            mcse: var.sqrt() / ess_mean.sqrt(),
            ess: ess_bulk(chains),
            rhat: rhat(chains),
        }
    }
}

/// Linear-interpolation quantile (type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

/// Halves each chain (dropping the middle draw of odd-length chains).
pub fn split_chains(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * chains.len());
    for c in chains {
        let half = c.len() / 2;
        out.push(c[..half].to_vec());
        out.push(c[c.len() - half..].to_vec());
    }
    out
}

/// Replaces draws by normal scores of their pooled ranks (ties get the
/// average rank).
pub fn rank_normalize(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut idx: Vec<(f64, usize, usize)> = Vec::new();
    for (c, chain) in chains.iter().enumerate() {
        for (i, &x) in chain.iter().enumerate() {
            idx.push((x, c, i));
        }
    }
    idx.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s = idx.len() as f64;
    let normal = Normal::standard();
    let mut out: Vec<Vec<f64>> = chains.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut k = 0;
    while k < idx.len() {
        let mut j = k;
        while j + 1 < idx.len() && idx[j + 1].0 == idx[k].0 {
            j += 1;
        }
        let rank = (k + j) as f64 / 2.0 + 1.0;
        let z = normal.inverse_cdf((rank - 0.375) / (s + 0.25));
        for &(_, c, i) in &idx[k..=j] {
            out[c][i] = z;
        }
        k = j + 1;
    }
    out
}

fn basic_rhat(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len() as f64;
    let n = chains[0].len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = n / (m - 1.0).max(1.0) * means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>();
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / m;
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    (((n - 1.0) / n * w + b / n) / w).sqrt()
}

/// Rank-normalised split R-hat: the larger of the bulk and folded (tail)
/// versions.
pub fn rhat(chains: &[Vec<f64>]) -> f64 {
    let split = split_chains(chains);
    let bulk = basic_rhat(&rank_normalize(&split));
    let all: Vec<f64> = split.iter().flatten().copied().collect();
    let med = quantile(&all, 0.5);
    let folded: Vec<Vec<f64>> = split.iter().map(|c| c.iter().map(|x| (x - med).abs()).collect()).collect();
    let tail = basic_rhat(&rank_normalize(&folded));
    bulk.max(tail)
}

/// ESS of the rank-normalised split chains.
pub fn ess_bulk(chains: &[Vec<f64>]) -> f64 {
    ess(&rank_normalize(&split_chains(chains)))
}

fn autocov(chain: &[f64], mean: f64, lag: usize) -> f64 {
    let n = chain.len();
    (0..n - lag).map(|i| (chain[i] - mean) * (chain[i + lag] - mean)).sum::<f64>() / n as f64
}

/// Multi-chain ESS with Geyer's initial monotone sequence. Capped at the
/// number of draws.
pub fn ess(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let total = (m * n) as f64;
    if n < 4 {
        return total;
    }
    let means: Vec<f64> = chains.iter().map(|c| c[..n].iter().sum::<f64>() / n as f64).collect();
    let nf = n as f64;
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| autocov(&c[..n], *mu, 0) * nf / (nf - 1.0))
        .sum::<f64>()
        / m as f64;
    let grand = means.iter().sum::<f64>() / m as f64;
    let b_over_n = if m > 1 {
        means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>() / (m as f64 - 1.0)
    } else {
        0.0
    };
    let var_plus = w * (nf - 1.0) / nf + b_over_n;
    if !(var_plus > 0.0) {
        return total;
    }
    let rho = |t: usize| {
        let acov = chains.iter().zip(&means).map(|(c, mu)| autocov(&c[..n], *mu, t)).sum::<f64>() / m as f64;
        1.0 - (w - acov) / var_plus
    };
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let pair = if t == 0 { 1.0 + rho(1) } else { rho(t) + rho(t + 1) };
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        t += 2;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / total.log10());
    (total / tau).min(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn iid(m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect()
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn iid_draws_look_converged() {
        let c = iid(4, 1000, 1);
        let s = ParamSummary::from_chains(&c);
        assert!(s.rhat < 1.01, "{}", s.rhat);
        assert!(s.ess > 2500.0 && s.ess <= 4000.0, "{}", s.ess);
        assert!(s.ci_low < s.median && s.median < s.ci_high);
    }

    #[test]
    fn shifted_chain_flags_rhat() {
        let mut c = iid(4, 500, 2);
        for x in &mut c[0] {
            *x += 3.0;
        }
        assert!(rhat(&c) > 1.1);
    }

    #[test]
    fn sticky_chain_has_low_ess() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                let mut x = 0.0f64;
                (0..2000)
                    .map(|_| {
                        x = 0.95 * x + rng.sample::<f64, _>(StandardNormal);
                        x
                    })
                    .collect()
            })
            .collect();
        // AR(1) with phi = 0.95 has ESS about n (1 - phi) / (1 + phi)
        let e = ess(&chains);
        assert!(e > 100.0 && e < 400.0, "{e}");
    }

    #[test]
    fn ties_share_a_rank() {
        let z = rank_normalize(&[vec![1.0, 1.0, 2.0]]);
        assert_eq!(z[0][0], z[0][1]);
        assert!(z[0][2] > z[0][0]);
    }
}
