//! Streaming moment accumulation and standard-normal special functions.

mod normal;

pub use normal::{erf, erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};

use crate::{Error, Result};

/// One-pass (Welford) accumulator for the sample mean and the running sum of
/// squared deviations.  Chosen over a naive sum of squares because the
/// stage-one variance estimate gates the coverage guarantee and must not lose
/// digits to cancellation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    sum_sq_dev: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one observation.  Non-finite values are rejected.
    pub fn accumulate(&mut self, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::NonFiniteSample(y));
        }
        self.count += 1;
        let delta = y - self.mean;
        self.mean += delta / self.count as f64;
        self.sum_sq_dev += delta * (y - self.mean);
        Ok(())
    }

    /// Merges another accumulator as if its stream had been concatenated onto
    /// this one (Chan's parallel update).
    pub fn merge(&self, other: &MomentAccumulator) -> MomentAccumulator {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let delta = other.mean - self.mean;
        let count = self.count + other.count;
        MomentAccumulator {
            count,
            mean: self.mean + delta * n2 / (n1 + n2),
            sum_sq_dev: self.sum_sq_dev + other.sum_sq_dev + delta * delta * n1 * n2 / (n1 + n2),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean; 0 for an empty accumulator.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Running sum of squared deviations from the mean.
    pub fn sum_sq_dev(&self) -> f64 {
        self.sum_sq_dev
    }

    /// Unbiased sample variance `sum_sq_dev / (count - 1)`.
    pub fn sample_variance(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                have: self.count,
            });
        }
        Ok(self.sum_sq_dev / (self.count - 1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn accumulate_all(values: &[f64]) -> MomentAccumulator {
        let mut acc = MomentAccumulator::new();
        for &y in values {
            acc.accumulate(y).unwrap();
        }
        acc
    }

    #[test]
    fn constant_stream() {
        let acc = accumulate_all(&[4.0, 4.0, 4.0]);
        assert_eq!(acc.mean(), 4.0);
        assert_eq!(acc.sum_sq_dev(), 0.0);
        assert_eq!(acc.sample_variance().unwrap(), 0.0);
    }

    #[test]
    fn hand_arithmetic() {
        let acc = accumulate_all(&[0.0, 2.0]);
        assert_eq!(acc.mean(), 1.0);
        assert_eq!(acc.sum_sq_dev(), 2.0);
        assert_eq!(acc.sample_variance().unwrap(), 2.0);
    }

    #[test]
    fn rejects_non_finite() {
        let mut acc = MomentAccumulator::new();
        assert!(acc.accumulate(f64::NAN).is_err());
        assert!(acc.accumulate(f64::INFINITY).is_err());
        assert_eq!(acc.count(), 0);
    }

    #[test]
    fn variance_needs_two() {
        let acc = accumulate_all(&[1.0]);
        assert_eq!(
            acc.sample_variance(),
            Err(Error::InsufficientData { needed: 2, have: 1 })
        );
    }

    // Two-pass reference used as an independent oracle for the streaming path.
    fn two_pass(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ssd = values.iter().map(|y| (y - mean).powi(2)).sum::<f64>();
        (mean, ssd)
    }

    #[test]
    fn matches_two_pass_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..10_000).map(|_| 100.0 + rng.gen::<f64>()).collect();
        let acc = accumulate_all(&values);
        let (mean, ssd) = two_pass(&values);
        assert!((acc.mean() - mean).abs() <= 1e-12 * mean.abs());
        assert!((acc.sum_sq_dev() - ssd).abs() <= 1e-12 * ssd.abs());
    }

    #[test]
    fn merge_equals_concatenation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..5_000).map(|_| rng.gen::<f64>() * 3.0 - 1.0).collect();
        for split in [0, 1, 1234, 4999, 5000] {
            let merged = accumulate_all(&values[..split]).merge(&accumulate_all(&values[split..]));
            let whole = accumulate_all(&values);
            assert_eq!(merged.count(), whole.count());
            assert!((merged.mean() - whole.mean()).abs() <= 1e-12 * whole.mean().abs().max(1.0));
            assert!(
                (merged.sum_sq_dev() - whole.sum_sq_dev()).abs()
                    <= 1e-12 * whole.sum_sq_dev().max(1.0)
            );
        }
    }

    // E[s^2] = sigma^2, with the spread of the replicated s^2 values taken
    // from var(s^2) = sigma^4/n (kappa~ - (n-3)/(n-1)).
    #[test]
    fn sample_variance_unbiased_for_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let reps = 10_000usize;
        let n = 10usize;
        let mut mean_s2 = 0.0;
        for _ in 0..reps {
            let values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            mean_s2 += accumulate_all(&values).sample_variance().unwrap();
        }
        mean_s2 /= reps as f64;
        let sigma2 = 1.0 / 12.0;
        // uniform(0,1): kappa~ = 1.8
        let var_s2 = sigma2 * sigma2 / n as f64 * (1.8 - (n as f64 - 3.0) / (n as f64 - 1.0));
        let band = 4.0 * (var_s2 / reps as f64).sqrt();
        assert!((mean_s2 - sigma2).abs() <= band);
    }
}
