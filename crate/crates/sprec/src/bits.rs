//! Bit-string helpers.
//!
//! Bits are stored one per byte (`0` or `1`) for cheap random access during
//! decoding and Cascade index juggling. Packed big-endian byte form is only
//! used at serialization boundaries.

use rand::Rng;

/// Draws `len` uniform random bits.
pub fn random_bits<R: Rng>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..2u8)).collect()
}

/// Element-wise XOR of two equal-length bit strings.
///
/// # Panics
///
/// Panics if lengths differ.
pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len(), "xor of unequal lengths");
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Number of positions where `a` and `b` differ.
///
/// # Panics
///
/// Panics if lengths differ.
pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    assert_eq!(a.len(), b.len(), "distance of unequal lengths");
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Parity (XOR) of all bits.
pub fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |acc, &b| acc ^ b)
}

/// Packs bits into bytes, most significant bit first.
///
/// The final byte is zero-padded on the right when `bits.len()` is not a
/// multiple of 8.
///
/// # Example
///
/// ```
/// let packed = sprec::bits::pack_msb(&[1, 0, 1, 1]);
/// assert_eq!(packed, vec![0b1011_0000]);
/// ```
pub fn pack_msb(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        debug_assert!(b <= 1);
        out[i / 8] |= (b & 1) << (7 - i % 8);
    }
    out
}

/// Inverse of [`pack_msb`]; `len` recovers the unpadded bit count.
pub fn unpack_msb(bytes: &[u8], len: usize) -> Vec<u8> {
    assert!(len <= bytes.len() * 8, "unpack length exceeds input");
    (0..len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect()
}
