//! Binary symmetric channel model and QBER estimation.
//!
//! Correlated bit strings are produced by flipping each bit of a uniform
//! string independently with a fixed crossover probability. A disclosed
//! random sample of positions yields the error-rate estimate used to pick
//! reconciliation parameters; sampled positions are discarded from the key.

use crate::error::{Error, Result};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Memoryless binary symmetric channel with a seeded noise stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    /// Flip probability, in `[0, 0.5]`.
    pub crossover: f64,
    /// Seed for the noise stream; equal seeds reproduce identical noise.
    pub seed: u64,
}

impl ChannelSpec {
    /// # Errors
    ///
    /// Rejects crossover outside `[0, 0.5]` or non-finite values.
    pub fn new(crossover: f64, seed: u64) -> Result<Self> {
        if !crossover.is_finite() || !(0.0..=0.5).contains(&crossover) {
            return Err(Error::config(format!(
                "crossover must lie in [0, 0.5], got {crossover}"
            )));
        }
        Ok(ChannelSpec { crossover, seed })
    }
}

/// Sends `x` through the channel, flipping each bit independently.
pub fn transmit(x: &[u8], spec: &ChannelSpec) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    x.iter()
        .map(|&b| {
            if rng.gen_bool(spec.crossover) {
                b ^ 1
            } else {
                b
            }
        })
        .collect()
}

/// A pair of correlated strings as held by the two parties.
#[derive(Debug, Clone)]
pub struct CorrelatedPair {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    /// Crossover probability that generated the pair.
    pub crossover: f64,
}

impl CorrelatedPair {
    /// Draws a uniform `x` of length `len` and transmits it to obtain `y`.
    ///
    /// The uniform draw and the channel noise use decorrelated streams
    /// derived from `seed`.
    pub fn generate(len: usize, crossover: f64, seed: u64) -> Result<Self> {
        let spec = ChannelSpec::new(crossover, seed.wrapping_add(0x9e37_79b9_7f4a_7c15))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = crate::bits::random_bits(&mut rng, len);
        let y = transmit(&x, &spec);
        Ok(CorrelatedPair { x, y, crossover })
    }
}

/// Discloses `m` uniformly sampled positions and estimates the error rate.
///
/// Returns the estimate together with the sorted list of undisclosed
/// positions; disclosed bits must not be reused as key material.
///
/// # Errors
///
/// Fails when `m` exceeds the string length or the lengths differ.
///
/// # Example
///
/// ```
/// use sprec::channel::{estimate_qber, CorrelatedPair};
///
/// let pair = CorrelatedPair::generate(20_000, 0.05, 11).unwrap();
/// let (est, kept) = estimate_qber(&pair.x, &pair.y, 10_000, 42).unwrap();
/// assert!((est - 0.05).abs() < 0.007);
/// assert_eq!(kept.len(), 10_000);
/// ```
pub fn estimate_qber(x: &[u8], y: &[u8], m: usize, seed: u64) -> Result<(f64, Vec<usize>)> {
    if x.len() != y.len() {
        return Err(Error::config(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if m > x.len() {
        return Err(Error::config(format!(
            "sample size {m} exceeds string length {}",
            x.len()
        )));
    }
    if m == 0 {
        return Err(Error::config("sample size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disclosed = sample(&mut rng, x.len(), m).into_vec();
    disclosed.sort_unstable();
    let mismatches = disclosed.iter().filter(|&&i| x[i] != y[i]).count();
    let estimate = mismatches as f64 / m as f64;

    let mut kept = Vec::with_capacity(x.len() - m);
    let mut next = disclosed.iter().copied().peekable();
    for i in 0..x.len() {
        if next.peek() == Some(&i) {
            next.next();
        } else {
            kept.push(i);
        }
    }
    Ok((estimate, kept))
}
