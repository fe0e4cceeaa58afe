//! Statistical applications of error-controlled series truncation: a noisy
//! Metropolis sampler for the Conway-Maxwell-Poisson model, maximum marginal
//! likelihood for an Erlang queueing model, count moments, and the benchmark
//! grids behind the command-line tool.

pub mod comp;
pub mod diagnostics;
pub mod erlang;
pub mod error;
pub mod experiments;
pub mod mcmc;
pub mod moments;

pub use comp::{comp_log_likelihood, CompLikelihood};
pub use erlang::{
    erlang_hessian, erlang_marginal_loglik, erlang_mmle, ErlangMmleResult, ErlangOptions, ErlangTruncation,
    MmleOptions, Representation,
};
pub use error::{Result, StatsError};
pub use mcmc::{comp_noisy_metropolis, CompPosteriorConfig, McmcOutput, McmcSummary};
pub use moments::{factorial_moment, raw_moment, sentinel_expected_cluster_size};
