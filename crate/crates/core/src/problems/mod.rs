//! Benchmark problem families with exact oracles: the d-dimensional
//! single-hump integrand (closed-form mean, variance, and kurtosis) and the
//! Asian geometric-mean call option (Brownian-bridge paths, analytic price).

mod bridge;
mod hump;
mod option;

pub use bridge::brownian_bridge_path;
pub use hump::{hump_eval, hump_exact_moments, hump_random_instance, HumpMoments, HumpParams};
pub use option::{option_exact_price, option_payoff, OptionParams};
