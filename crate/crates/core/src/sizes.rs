//! Sample-size formulas: the CLT, Chebychev, and Berry-Esseen sizes, the
//! second-stage size `N_mu`, and the kurtosis cap tying the pilot sample size
//! and variance inflation factor to the class of distributions covered by the
//! guarantee.

use crate::stats::{std_normal_cdf, std_normal_quantile};
use crate::{Error, Result};

/// Berry-Esseen constants: uniform bound `A1 (M3 + A2) / sqrt(n)`.
pub const BE_A1: f64 = 0.3328;
pub const BE_A2: f64 = 0.429;
/// Non-uniform bound `A3 M3 / (sqrt(n) (1 + |x|^3))`.
pub const BE_A3: f64 = 18.1139;

/// Sentinel returned when a sample-size search would exceed `u64` range.
pub const SATURATED: u64 = u64::MAX;

/// Inputs shared by the sample-size formulas.
///
/// `m3` bounds the scaled third central moment `E|Y - mu|^3 / sigma^3`; by
/// Jensen's inequality it is at least 1, and callers running the two-stage
/// algorithm pass `kappa_max^(3/4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeQuery {
    pub epsilon: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub m3: f64,
}

impl SizeQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Domain(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.m3 >= 1.0) {
            return Err(Error::Domain(format!("m3 must be >= 1, got {}", self.m3)));
        }
        Ok(())
    }
}

/// Parameters of the kurtosis cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KurtosisCapQuery {
    pub alpha: f64,
    pub n_sigma: u64,
    /// Variance inflation factor `C` (the estimate is `C^2 s^2`), `C > 1`.
    pub inflation: f64,
}

/// Which term of `max(floor, min(N_Cheb, N_BE))` produced the size.
/// Ties break toward the earlier variant for diagnostic determinism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Floor,
    Cheb,
    Be,
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selector::Floor => write!(f, "FLOOR"),
            Selector::Cheb => write!(f, "CHEB"),
            Selector::Be => write!(f, "BE"),
        }
    }
}

// Ceiling with a 1e-9 relative slack so values that are exact integers up to
// floating-point noise do not round up; result at least `min`.
fn ceil_slack(x: f64, min: u64) -> u64 {
    if !x.is_finite() || x >= 9.2e18 {
        return SATURATED;
    }
    let v = (x - x.abs() * 1e-9).ceil();
    (v as u64).max(min)
}

/// The largest modified kurtosis covered by the guarantee for a given pilot
/// size, inflation factor, and uncertainty:
/// `(n-3)/(n-1) + (alpha n / (1-alpha)) (1 - 1/C^2)^2`.
pub fn kappa_max(q: &KurtosisCapQuery) -> f64 {
    let n = q.n_sigma as f64;
    let c2 = q.inflation * q.inflation;
    (n - 3.0) / (n - 1.0) + (q.alpha * n / (1.0 - q.alpha)) * (1.0 - 1.0 / c2).powi(2)
}

/// Smallest pilot size `n_sigma >= 2` whose kurtosis cap reaches
/// `kappa_target`.  The cap is strictly increasing in `n_sigma`, so a
/// doubling bracket plus bisection finds the boundary; minimality is
/// re-checked against `n_sigma - 1`.
pub fn min_n_sigma(kappa_target: f64, alpha: f64, inflation: f64) -> u64 {
    let cap = |n: u64| kappa_max(&KurtosisCapQuery { alpha, n_sigma: n, inflation });
    let mut hi = 2u64;
    while cap(hi) < kappa_target {
        hi = hi.saturating_mul(2);
        if hi == u64::MAX {
            return SATURATED;
        }
    }
    let mut lo = 2u64; // invariant: cap(lo) < target <= cap(hi), unless lo already passes
    if cap(lo) >= kappa_target {
        return lo;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if cap(mid) >= kappa_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    debug_assert!(cap(hi) >= kappa_target && cap(hi - 1) < kappa_target);
    hi
}

/// CLT sample size `ceil((z_{alpha/2} sigma / eps)^2)`, at least 1.
pub fn n_clt(q: &SizeQuery) -> u64 {
    if q.sigma == 0.0 {
        return 1;
    }
    let z = std_normal_quantile(1.0 - q.alpha / 2.0).expect("alpha in (0,1)");
    ceil_slack((z * q.sigma / q.epsilon).powi(2), 1)
}

/// Chebychev sample size `ceil(sigma^2 / (alpha eps^2))`, at least 1.
pub fn n_cheb(q: &SizeQuery) -> u64 {
    if q.sigma == 0.0 {
        return 1;
    }
    let r = q.sigma / q.epsilon;
    ceil_slack(r * r / q.alpha, 1)
}

/// The Berry-Esseen bound `Delta_n(x, M3)`:
/// `min(A1 (M3 + A2), A3 M3 / (1 + |x|^3)) / sqrt(n)`.
pub fn be_delta(n: u64, x: f64, m3: f64) -> f64 {
    let uniform = BE_A1 * (m3 + BE_A2);
    let nonuniform = BE_A3 * m3 / (1.0 + x.abs().powi(3));
    uniform.min(nonuniform) / (n as f64).sqrt()
}

// Left side of the Berry-Esseen size condition; strictly decreasing in n.
fn be_tail(n: u64, sigma_over_eps: f64, m3: f64) -> f64 {
    let x = (n as f64).sqrt() / sigma_over_eps;
    std_normal_cdf(-x) + be_delta(n, x, m3)
}

/// Berry-Esseen sample size: the least `n` with
/// `Phi(-sqrt(n) eps/sigma) + Delta_n(sqrt(n) eps/sigma, M3) <= alpha/2`.
///
/// Both branches of `Delta_n` and the `Phi` term decrease in `n`, so the
/// condition is monotone and the minimum is located by doubling then
/// bisection, with minimality re-verified at `n - 1`.
pub fn n_be(q: &SizeQuery) -> u64 {
    if q.sigma == 0.0 {
        return 1;
    }
    let r = q.sigma / q.epsilon;
    let target = q.alpha / 2.0;
    let ok = |n: u64| be_tail(n, r, q.m3) <= target;
    if ok(1) {
        return 1;
    }
    let mut hi = 2u64;
    while !ok(hi) {
        if hi > (1u64 << 62) {
            return SATURATED;
        }
        hi *= 2;
    }
    let mut lo = hi / 2; // !ok(lo) && ok(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    debug_assert!(ok(hi) && !ok(hi - 1));
    hi
}

/// Second-stage sample size `max(floor, min(N_Cheb, N_BE))` and the selector
/// naming the active term.  `floor = 1` is the plain definition; `floor =
/// n_sigma` is the practical variant that also covers arbitrarily-heavy-tailed
/// `Y` with `sigma^2 <= eps^2 alpha n_sigma`.
pub fn n_mu(q: &SizeQuery, floor: u64) -> (u64, Selector) {
    debug_assert!(floor >= 1);
    let cheb = n_cheb(q);
    let be = n_be(q);
    let inner = cheb.min(be);
    if floor >= inner {
        (floor, Selector::Floor)
    } else if cheb <= be {
        (cheb, Selector::Cheb)
    } else {
        (be, Selector::Be)
    }
}
