//! Two-stage Monte Carlo estimation with guaranteed fixed-width confidence
//! intervals.
//!
//! The estimator produces `mu_hat` with `Pr[|mu - mu_hat| <= eps] >= 1 - alpha`
//! for any random variable whose modified kurtosis stays below a cap implied by
//! the user's choice of pilot sample size and variance inflation factor.  The
//! first stage buys a conservative variance estimate; the second stage sizes
//! the mean estimate with a Berry-Esseen (non-asymptotic CLT) bound.
//!
//! Modules:
//! - [`stats`]: streaming moments and standard-normal special functions
//! - [`sizes`]: the sample-size formulas (CLT, Chebychev, Berry-Esseen) and
//!   the kurtosis cap
//! - [`engine`]: the two-stage estimator itself
//! - [`cost`]: probabilistic cost bound and cost-ratio curves
//! - [`problems`]: benchmark families with exact oracles (single-hump
//!   integrand, geometric Asian call)
//! - [`harness`]: seeded batch experiments with CSV output

pub mod cost;
pub mod engine;
mod error;
pub mod harness;
pub mod problems;
pub mod sampler;
pub mod sizes;
pub mod stats;

pub use error::{Error, Result};
