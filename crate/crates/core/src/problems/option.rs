//! Asian geometric-mean call option under geometric Brownian motion: payoff
//! simulation on Brownian-bridge paths and the analytic price.  The
//! trapezoid-weighted geometric mean of lognormal prices is itself lognormal,
//! so the price reduces to a Black-style closed form.

use super::brownian_bridge_path;
use crate::stats::std_normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionParams {
    /// Spot price `S(0)`.
    pub s0: f64,
    /// Strike `K`.
    pub strike: f64,
    /// Expiry in years.
    pub maturity: f64,
    /// Continuously compounded interest rate per year.
    pub rate: f64,
    /// Volatility per sqrt-year.
    pub volatility: f64,
    /// Number of monitoring times `T/d, 2T/d, ..., T`.
    pub d: usize,
}

// log of the trapezoid-weighted geometric mean, given log-price increments
// above ln S0 at the d monitoring times; weight 1/2 at both ends.
fn log_geo_mean(p: &OptionParams, log_growth: impl Fn(usize) -> f64) -> f64 {
    let d = p.d;
    let mut acc = 0.0; // t = 0 term has zero growth and half weight
    for k in 1..d {
        acc += log_growth(k);
    }
    acc += 0.5 * log_growth(d);
    p.s0.ln() + acc / d as f64
}

/// Discounted payoff of one path driven by `d` standard normals, consumed in
/// Brownian-bridge order.
pub fn option_payoff(p: &OptionParams, z: &[f64]) -> f64 {
    assert_eq!(z.len(), p.d, "need exactly d normal inputs");
    let path = brownian_bridge_path(p.maturity, p.d, z);
    let drift = p.rate - 0.5 * p.volatility * p.volatility;
    let dt = p.maturity / p.d as f64;
    let lg = log_geo_mean(p, |k| drift * (k as f64 * dt) + p.volatility * path[k - 1]);
    (lg.exp() - p.strike).max(0.0) * (-p.rate * p.maturity).exp()
}

/// Exact price: the log geometric mean is Gaussian with mean
/// `ln S0 + (r - v^2/2) T w` and variance `v^2 sum_{j,k} u_j u_k min(t_j, t_k)`
/// over the trapezoid weights `u`, so the discounted expectation follows the
/// lognormal call formula.
pub fn option_exact_price(p: &OptionParams) -> f64 {
    let d = p.d;
    let dt = p.maturity / d as f64;
    // trapezoid weights over interior times t_1..t_d (t_0 carries no motion)
    let weight = |k: usize| if k == d { 0.5 / d as f64 } else { 1.0 / d as f64 };
    // mean time weight: always 1/2 for the trapezoid rule on [0, T]
    let mut wbar = 0.0;
    for k in 1..=d {
        wbar += weight(k) * k as f64 / d as f64;
    }
    let mean_log = p.s0.ln()
        + (p.rate - 0.5 * p.volatility * p.volatility) * p.maturity * wbar;
    let mut var_w = 0.0;
    for j in 1..=d {
        for k in 1..=d {
            var_w += weight(j) * weight(k) * (j.min(k) as f64) * dt;
        }
    }
    let s = p.volatility * var_w.sqrt();
    let discount = (-p.rate * p.maturity).exp();
    if s == 0.0 {
        return (mean_log.exp() - p.strike).max(0.0) * discount;
    }
    let forward = (mean_log + 0.5 * s * s).exp();
    let d2 = (mean_log - p.strike.ln()) / s;
    let d1 = d2 + s;
    discount * (forward * std_normal_cdf(d1) - p.strike * std_normal_cdf(d2))
}
