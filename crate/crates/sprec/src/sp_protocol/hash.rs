//! 2-universal hashing for reconciliation verification.
//!
//! Tags are computed in two stages: a polynomial-evaluation hash over
//! GF(2^64) compresses the message to one field element (collision
//! probability at most blocks/2^64 for distinct messages), then a pairwise
//! independent affine map over the same field mixes it and the low
//! `tag_bits` bits are kept (adding exactly 2^-tag_bits). For 34-bit tags
//! on desk-scale messages the total stays below 1e-10.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::pack_msb;
use crate::error::{Error, Result};

/// Multiplication in GF(2^64) modulo x^64 + x^4 + x^3 + x + 1.
pub fn gf_mul(a: u64, b: u64) -> u64 {
    let mut prod: u128 = 0;
    for i in 0..64 {
        if b >> i & 1 == 1 {
            prod ^= (a as u128) << i;
        }
    }
    reduce(prod)
}

/// Reduces a 128-bit carry-less product modulo the field polynomial.
fn reduce(prod: u128) -> u64 {
    let lo = prod as u64;
    let hi = (prod >> 64) as u64;
    // hi * (x^4 + x^3 + x + 1), up to 68 bits.
    let t = (hi as u128) ^ ((hi as u128) << 1) ^ ((hi as u128) << 3) ^ ((hi as u128) << 4);
    let t_lo = t as u64;
    let t_hi = (t >> 64) as u64;
    let t2 = t_hi ^ (t_hi << 1) ^ (t_hi << 3) ^ (t_hi << 4);
    lo ^ t_lo ^ t2
}

/// Identifies one member of the hash family.
///
/// The three keys are drawn from a seeded stream; the seed is the public
/// "function identifier" sent alongside the tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashSpec {
    pub function_seed: u64,
    pub tag_bits: usize,
}

impl HashSpec {
    /// # Errors
    ///
    /// Tag lengths outside `1..=64` are rejected.
    pub fn new(function_seed: u64, tag_bits: usize) -> Result<Self> {
        if !(1..=64).contains(&tag_bits) {
            return Err(Error::config(format!(
                "tag length {tag_bits} outside 1..=64"
            )));
        }
        Ok(HashSpec {
            function_seed,
            tag_bits,
        })
    }

    /// Tag of a bit string under this family member.
    pub fn tag(&self, bits: &[u8]) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.function_seed);
        let point: u64 = rng.gen();
        let mix_a: u64 = rng.gen();
        let mix_b: u64 = rng.gen();

        // Horner evaluation over 64-bit blocks, big-endian within a block.
        // The bit length is absorbed as a final block so padding is benign.
        let bytes = pack_msb(bits);
        let mut acc = 0u64;
        for chunk in bytes.chunks(8) {
            let mut block = [0u8; 8];
            block[..chunk.len()].copy_from_slice(chunk);
            acc = gf_mul(acc, point) ^ u64::from_be_bytes(block);
        }
        acc = gf_mul(acc, point) ^ bits.len() as u64;

        let mixed = gf_mul(acc, mix_a) ^ mix_b;
        if self.tag_bits == 64 {
            mixed
        } else {
            mixed & ((1u64 << self.tag_bits) - 1)
        }
    }
}

/// Tag length needed to bound the verification failure by `eps_ec`.
///
/// # Errors
///
/// `eps_ec` must lie in `(0, 1)` and be no smaller than 2^-64.
pub fn tag_bits_for(eps_ec: f64) -> Result<usize> {
    if !eps_ec.is_finite() || eps_ec <= 0.0 || eps_ec >= 1.0 {
        return Err(Error::config(format!(
            "verification bound {eps_ec} outside (0, 1)"
        )));
    }
    let bits = (1.0 / eps_ec).log2().ceil() as usize;
    if bits > 64 {
        return Err(Error::config(format!(
            "verification bound {eps_ec} needs {bits} tag bits, above the 64-bit cap"
        )));
    }
    Ok(bits.max(1))
}

/// Compares the two parties' strings through tags of length
/// `ceil(log2 1/eps_ec)`; returns the tag length and whether tags agree.
///
/// For distinct equal-length inputs the match probability over the function
/// choice is below `eps_ec`.
///
/// # Errors
///
/// Length mismatch or an out-of-range `eps_ec`.
pub fn hash_verify(x: &[u8], y: &[u8], eps_ec: f64, function_seed: u64) -> Result<(usize, bool)> {
    if x.len() != y.len() {
        return Err(Error::config(format!(
            "hash inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let bits = tag_bits_for(eps_ec)?;
    let spec = HashSpec::new(function_seed, bits)?;
    Ok((bits, spec.tag(x) == spec.tag(y)))
}
