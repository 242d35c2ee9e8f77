//! The two-stage estimator: a pilot sample buys a conservative variance
//! estimate, which sizes an independent second sample whose mean carries the
//! fixed-width confidence interval guarantee.

use std::time::Instant;

use crate::sampler::{SampleStream, Sampler};
use crate::sizes::{self, KurtosisCapQuery, Selector, SizeQuery};
use crate::stats::MomentAccumulator;
use crate::{Error, Result};

/// Which floor enters `N_mu = max(floor, min(N_Cheb, N_BE))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloorPolicy {
    /// Plain definition: floor 1.
    One,
    /// Practical variant: floor `n_sigma`.  Also certifies the guarantee for
    /// any `Y` with `sigma^2 <= eps^2 alpha n_sigma` regardless of kurtosis.
    NSigma,
}

/// User inputs of the two-stage algorithm plus budget and floor policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Pilot (variance-estimation) sample size, at least 2.
    pub n_sigma: u64,
    /// Variance inflation factor `C > 1`; the variance estimate is `C^2 s^2`.
    pub inflation: f64,
    /// Overall uncertainty, in (0, 1).
    pub alpha: f64,
    /// Confidence-interval half-width.
    pub epsilon: f64,
    /// Total sample budget; exceeding it truncates stage two and voids the
    /// guarantee (reported, never silent).
    pub n_max: u64,
    pub floor_policy: FloorPolicy,
}

pub const DEFAULT_N_MAX: u64 = 1_000_000_000;

impl EngineConfig {
    pub fn new(n_sigma: u64, inflation: f64, alpha: f64, epsilon: f64) -> Self {
        Self {
            n_sigma,
            inflation,
            alpha,
            epsilon,
            n_max: DEFAULT_N_MAX,
            floor_policy: FloorPolicy::NSigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sigma < 2 {
            return Err(Error::Config(format!("n_sigma must be >= 2, got {}", self.n_sigma)));
        }
        if !(self.inflation > 1.0) {
            return Err(Error::Config(format!("inflation must be > 1, got {}", self.inflation)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.n_sigma >= self.n_max {
            return Err(Error::Config(format!(
                "n_sigma = {} leaves no budget for stage two (n_max = {})",
                self.n_sigma, self.n_max
            )));
        }
        Ok(())
    }

    /// Per-stage uncertainty: `(1 - alpha_tilde)^2 = 1 - alpha`.
    pub fn alpha_tilde(&self) -> f64 {
        1.0 - (1.0 - self.alpha).sqrt()
    }

    /// Kurtosis cap implied by `(alpha_tilde, n_sigma, C)`.
    pub fn kappa_max(&self) -> f64 {
        sizes::kappa_max(&KurtosisCapQuery {
            alpha: self.alpha_tilde(),
            n_sigma: self.n_sigma,
            inflation: self.inflation,
        })
    }

    fn floor(&self) -> u64 {
        match self.floor_policy {
            FloorPolicy::One => 1,
            FloorPolicy::NSigma => self.n_sigma,
        }
    }
}

/// Full diagnostics of one two-stage run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub mu_hat: f64,
    /// Conservative variance estimate `C^2 s^2`.
    pub sigma_hat_sq: f64,
    /// Raw pilot sample variance.
    pub s2: f64,
    pub kappa_max_used: f64,
    pub alpha_tilde: f64,
    pub n_mu: u64,
    pub n_total: u64,
    pub selector: Selector,
    pub budget_truncated: bool,
    pub wall_time: f64,
}

fn take_mean<S: SampleStream>(stream: &mut S, n: u64) -> Result<MomentAccumulator> {
    let mut acc = MomentAccumulator::new();
    for _ in 0..n {
        acc.accumulate(stream.next_value())?;
    }
    Ok(acc)
}

/// Stage one alone: `(s^2, C^2 s^2)` from `n_sigma` pilot draws.
pub fn stage_one_variance<S: Sampler>(sampler: &S, cfg: &EngineConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let acc = take_mean(&mut sampler.substream(0), cfg.n_sigma)?;
    let s2 = acc.sample_variance()?;
    Ok((s2, cfg.inflation * cfg.inflation * s2))
}

/// Runs the full two-stage algorithm.
///
/// Stage one draws `n_sigma` samples from substream 0 and forms the inflated
/// variance estimate.  Stage two sizes `n_mu` from the Chebychev /
/// Berry-Esseen formulas at the per-stage uncertainty `alpha_tilde` with
/// `M3 = kappa_max^(3/4)`, draws that many fresh samples from substream 1,
/// and returns their mean.  If the budget would be exceeded, stage two is cut
/// to `n_max - n_sigma` and the report is flagged; truncation voids the
/// guarantee.
pub fn run_two_stage<S: Sampler>(sampler: &S, cfg: &EngineConfig) -> Result<EstimateReport> {
    let start = Instant::now();
    let (s2, sigma_hat_sq) = stage_one_variance(sampler, cfg)?;

    let alpha_tilde = cfg.alpha_tilde();
    let kappa_max_used = cfg.kappa_max();
    let m3 = kappa_max_used.powf(0.75);

    let query = SizeQuery {
        epsilon: cfg.epsilon,
        sigma: sigma_hat_sq.sqrt(),
        alpha: alpha_tilde,
        m3,
    };
    let (mut n_mu, selector) = sizes::n_mu(&query, cfg.floor());

    let budget_truncated = n_mu == sizes::SATURATED || cfg.n_sigma.saturating_add(n_mu) > cfg.n_max;
    if budget_truncated {
        n_mu = cfg.n_max - cfg.n_sigma;
    }

    let mu_hat = take_mean(&mut sampler.substream(1), n_mu)?.mean();

    Ok(EstimateReport {
        mu_hat,
        sigma_hat_sq,
        s2,
        kappa_max_used,
        alpha_tilde,
        n_mu,
        n_total: cfg.n_sigma + n_mu,
        selector,
        budget_truncated,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
