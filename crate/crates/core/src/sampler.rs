//! Seeded, splittable sample generation.
//!
//! The engine requires that stage two be provably independent of stage one;
//! samplers therefore expose numbered substreams of a counter-based generator
//! (ChaCha8) rather than a single advancing stream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::stats::std_normal_quantile;

/// One independent stream of IID draws of `Y`.
pub trait SampleStream {
    fn next_value(&mut self) -> f64;
}

/// A deterministic-given-seed source of independent substreams.
pub trait Sampler {
    type Stream: SampleStream;
    /// Substreams with distinct indices are statistically independent; equal
    /// `(seed, index)` always reproduces the same stream.
    fn substream(&self, index: u64) -> Self::Stream;
}

/// Uniform draw in the open interval (0, 1); 53 random bits, nudged off zero
/// so it is always a valid quantile argument.
pub fn uniform_open01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0) + (0.5 / 9007199254740992.0)
}

/// Standard normal draw by inverse-CDF transform of the uniform stream.
/// Inverse-CDF (rather than rejection or Box-Muller) keeps the mapping from
/// uniform stream to normal stream reproducible one-to-one.
pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    std_normal_quantile(uniform_open01(rng)).expect("uniform_open01 yields p in (0,1)")
}

/// Sampler mapping a seeded ChaCha8 substream through a draw function.
#[derive(Clone)]
pub struct SeededSampler<F> {
    seed: u64,
    draw: F,
}

impl<F> SeededSampler<F>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Clone,
{
    pub fn new(seed: u64, draw: F) -> Self {
        Self { seed, draw }
    }
}

pub struct SeededStream<F> {
    rng: ChaCha8Rng,
    draw: F,
}

impl<F> SampleStream for SeededStream<F>
where
    F: Fn(&mut ChaCha8Rng) -> f64,
{
    fn next_value(&mut self) -> f64 {
        (self.draw)(&mut self.rng)
    }
}

impl<F> Sampler for SeededSampler<F>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Clone,
{
    type Stream = SeededStream<F>;

    fn substream(&self, index: u64) -> Self::Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        SeededStream { rng, draw: self.draw.clone() }
    }
}

/// Wraps a stream and counts how many draws were taken; used by tests to
/// verify the engine's draw accounting.
pub struct CountingStream<S> {
    inner: S,
    count: std::sync::Arc<std::sync::atomic::AtomicU64>,
}

/// Sampler adapter observing the total number of draws across all substreams.
pub struct CountingSampler<S> {
    inner: S,
    count: std::sync::Arc<std::sync::atomic::AtomicU64>,
}

impl<S: Sampler> CountingSampler<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, count: Default::default() }
    }

    pub fn draws(&self) -> u64 {
        self.count.load(std::sync::atomic::Ordering::Relaxed)
    }
}

impl<S: Sampler> Sampler for CountingSampler<S> {
    type Stream = CountingStream<S::Stream>;

    fn substream(&self, index: u64) -> Self::Stream {
        CountingStream { inner: self.inner.substream(index), count: self.count.clone() }
    }
}

impl<S: SampleStream> SampleStream for CountingStream<S> {
    fn next_value(&mut self) -> f64 {
        self.count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.next_value()
    }
}
