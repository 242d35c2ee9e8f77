//! Single-hump test integrand on the unit cube,
//! `f(x) = a0 + b0 prod_j [1 + b_j exp(-(x_j - h_j)^2 / c_j^2)]`,
//! integrated against the uniform density.  Its first four moments reduce to
//! per-coordinate Gaussian integrals expressible through the error function,
//! giving exact `mu`, `sigma^2`, and modified kurtosis for any instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::stats::{erf, erfc};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HumpParams {
    pub d: usize,
    pub a0: f64,
    pub b0: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

/// Exact moments of a hump instance under uniform sampling on `[0,1]^d`.
/// `kappa_tilde` is NaN when the instance is constant (`sigma2 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumpMoments {
    pub mu: f64,
    pub sigma2: f64,
    pub kappa_tilde: f64,
}

impl HumpMoments {
    /// Cone membership: whether the guarantee applies under the given cap.
    /// NaN kurtosis (constant instance) never claims membership.
    pub fn in_cone(&self, kappa_max: f64) -> bool {
        self.kappa_tilde <= kappa_max
    }
}

impl HumpParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Domain("hump dimension must be >= 1".into()));
        }
        if self.b.len() != self.d || self.c.len() != self.d || self.h.len() != self.d {
            return Err(Error::Domain(format!(
                "hump parameter vectors must have length d = {}",
                self.d
            )));
        }
        if self.c.iter().any(|&c| c <= 0.0) {
            return Err(Error::Domain("hump widths c_j must be positive".into()));
        }
        Ok(())
    }

    /// Flat key=value record so a failing instance can be replayed exactly.
    pub fn to_record(&self) -> String {
        let join = |v: &[f64]| {
            v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
        };
        format!(
            "d={} a0={:e} b0={:e} b={} c={} h={}",
            self.d,
            self.a0,
            self.b0,
            join(&self.b),
            join(&self.c),
            join(&self.h)
        )
    }

    pub fn from_record(record: &str) -> Result<Self> {
        let mut d = None;
        let mut a0 = None;
        let mut b0 = None;
        let mut vecs: [Option<Vec<f64>>; 3] = [None, None, None];
        for field in record.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("malformed hump field: {field}")))?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Domain(format!("bad number in hump record: {s}")))
            };
            let parse_vec = |s: &str| s.split(',').map(parse).collect::<Result<Vec<f64>>>();
            match key {
                "d" => {
                    d = Some(value.parse::<usize>().map_err(|_| {
                        Error::Domain(format!("bad dimension in hump record: {value}"))
                    })?)
                }
                "a0" => a0 = Some(parse(value)?),
                "b0" => b0 = Some(parse(value)?),
                "b" => vecs[0] = Some(parse_vec(value)?),
                "c" => vecs[1] = Some(parse_vec(value)?),
                "h" => vecs[2] = Some(parse_vec(value)?),
                other => return Err(Error::Domain(format!("unknown hump field: {other}"))),
            }
        }
        let missing = || Error::Domain("incomplete hump record".into());
        let [b, c, h] = vecs;
        let params = HumpParams {
            d: d.ok_or_else(missing)?,
            a0: a0.ok_or_else(missing)?,
            b0: b0.ok_or_else(missing)?,
            b: b.ok_or_else(missing)?,
            c: c.ok_or_else(missing)?,
            h: h.ok_or_else(missing)?,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Evaluates the integrand at a point of `[0,1]^d`.
pub fn hump_eval(p: &HumpParams, x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), p.d);
    let mut prod = 1.0;
    for j in 0..p.d {
        let t = (x[j] - p.h[j]) / p.c[j];
        prod *= 1.0 + p.b[j] * (-t * t).exp();
    }
    p.a0 + p.b0 * prod
}

// int_0^1 exp(-m (x-h)^2 / c^2) dx for m >= 1, via the error function.
// When h lies outside [0,1] the two erf terms nearly cancel at small c, so
// that case is rewritten through the complementary function.
fn gauss_integral(m: f64, c: f64, h: f64) -> f64 {
    let s = m.sqrt() / c;
    let (lo, hi) = (s * (1.0 - h), s * h);
    let sum = if lo >= 0.0 && hi >= 0.0 {
        erf(lo) + erf(hi)
    } else if lo < 0.0 {
        erfc(-lo) - erfc(hi)
    } else {
        erfc(-hi) - erfc(lo)
    };
    0.5 * c / m.sqrt() * std::f64::consts::PI.sqrt() * sum
}

// E[g_j^k] for g_j(x) = 1 + b exp(-(x-h)^2/c^2), binomially expanded.
fn coord_power_mean(k: u32, b: f64, c: f64, h: f64) -> f64 {
    let mut total = 1.0; // m = 0 term
    let mut binom = 1.0;
    let mut bm = 1.0;
    for m in 1..=k {
        binom *= (k - m + 1) as f64 / m as f64;
        bm *= b;
        total += binom * bm * gauss_integral(m as f64, c, h);
    }
    total
}

/// Closed-form moments.  With `P = prod_j g_j`, independence across
/// coordinates gives `E[P^k] = prod_j E[g_j^k]`, and `f - mu = b0 (P - E P)`
/// turns raw product moments into the central moments of `f`.
pub fn hump_exact_moments(p: &HumpParams) -> HumpMoments {
    let mut pk = [1.0f64; 4]; // E[P^k] for k = 1..4
    for j in 0..p.d {
        for (k, slot) in pk.iter_mut().enumerate() {
            *slot *= coord_power_mean(k as u32 + 1, p.b[j], p.c[j], p.h[j]);
        }
    }
    let [p1, p2, p3, p4] = pk;
    let m2 = p2 - p1 * p1;
    let m4 = p4 - 4.0 * p1 * p3 + 6.0 * p1 * p1 * p2 - 3.0 * p1.powi(4);
    let mu = p.a0 + p.b0 * p1;
    let sigma2 = p.b0 * p.b0 * m2;
    let kappa_tilde = if sigma2 > 0.0 { m4 / (m2 * m2) } else { f64::NAN };
    HumpMoments { mu, sigma2, kappa_tilde }
}

/// Draws a random instance following the benchmark recipe: log-uniform hump
/// heights and widths, uniform centers, `b0` scaled so the standard deviation
/// hits a log-uniform target in `sigma_range`, and `a0` shifted so `mu = 1`.
pub fn hump_random_instance(seed: u64, d: usize, sigma_range: (f64, f64)) -> HumpParams {
    assert!(d >= 1);
    assert!(sigma_range.0 > 0.0 && sigma_range.1 >= sigma_range.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> f64 {
        (rng.gen::<f64>() * (hi / lo).ln() + lo.ln()).exp()
    };
    let b: Vec<f64> = (0..d).map(|_| log_uniform(&mut rng, 0.1, 10.0)).collect();
    let c: Vec<f64> = (0..d).map(|_| log_uniform(&mut rng, 1e-6, 1.0)).collect();
    let h: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let sigma_target = log_uniform(&mut rng, sigma_range.0, sigma_range.1);

    let mut unit = HumpParams { d, a0: 0.0, b0: 1.0, b, c, h };
    let unit_moments = hump_exact_moments(&unit);
    // variance scales as b0^2, so b0 is a pure rescaling to the target sigma
    unit.b0 = sigma_target / unit_moments.sigma2.sqrt();
    unit.a0 = 1.0 - unit.b0 * (unit_moments.mu - unit.a0);
    unit
}
