//! The single reconciliation message and its wire format.
//!
//! Wire layout, all integers little-endian, bit strings packed MSB-first:
//!
//! ```text
//! u32  syndrome bit count      then ceil(count/8) syndrome bytes
//! u32  revealed entry count    then per entry: u32 position, u8 value
//! u32  tag bit count           then ceil(count/8) tag bytes
//! u64  hash function seed
//! u64  leakage_bits
//! ```
//!
//! The trailing ledger field is redundant (syndrome bits + revealed count +
//! tag bits) and is cross-checked on read, so a corrupted ledger cannot
//! slip through deserialization.

use super::hash::HashSpec;
use crate::bits::{pack_msb, unpack_msb};
use crate::error::{Error, Result};

/// Everything Alice sends to Bob, with its exact information cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconciliationTranscript {
    /// Syndrome of the extended string, one entry per parity check.
    pub syndrome: Vec<u8>,
    /// Revealed modulation symbols as (block position, value), sorted by
    /// position; positions must belong to the extension set.
    pub revealed: Vec<(u32, u8)>,
    /// Family member used for verification.
    pub hash_spec: HashSpec,
    /// Alice's tag, low `hash_spec.tag_bits` bits significant.
    pub tag: u64,
    /// Exact information cost: syndrome bits + revealed values + tag bits.
    /// Revealed positions are free (derived from the shared seed).
    pub leakage_bits: u64,
}

impl ReconciliationTranscript {
    /// Assembles a transcript and fills in the leakage ledger.
    pub fn new(syndrome: Vec<u8>, revealed: Vec<(u32, u8)>, hash_spec: HashSpec, tag: u64) -> Self {
        let leakage_bits = (syndrome.len() + revealed.len() + hash_spec.tag_bits) as u64;
        ReconciliationTranscript {
            syndrome,
            revealed,
            hash_spec,
            tag,
            leakage_bits,
        }
    }

    /// Serializes to the wire format above.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.syndrome.len() as u32).to_le_bytes());
        out.extend_from_slice(&pack_msb(&self.syndrome));
        out.extend_from_slice(&(self.revealed.len() as u32).to_le_bytes());
        for &(pos, val) in &self.revealed {
            out.extend_from_slice(&pos.to_le_bytes());
            out.push(val);
        }
        let tag_bits = self.hash_spec.tag_bits;
        out.extend_from_slice(&(tag_bits as u32).to_le_bytes());
        let tag_bytes = tag_bits.div_ceil(8);
        out.extend_from_slice(&self.tag.to_le_bytes()[..tag_bytes]);
        out.extend_from_slice(&self.hash_spec.function_seed.to_le_bytes());
        out.extend_from_slice(&self.leakage_bits.to_le_bytes());
        out
    }

    /// Parses the wire format.
    ///
    /// # Errors
    ///
    /// Truncation, trailing bytes, nonzero padding, out-of-order revealed
    /// positions, or a ledger that disagrees with the section sizes.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };

        let syn_bits = r.u32("syndrome bit count")? as usize;
        let syn_bytes = r.take(syn_bits.div_ceil(8), "syndrome body")?;
        let syndrome = unpack_msb(syn_bytes, syn_bits);
        if syn_bytes.last().is_some_and(|&b| {
            let pad = syn_bytes.len() * 8 - syn_bits;
            b & ((1u16 << pad) - 1) as u8 != 0
        }) {
            return Err(Error::data("nonzero padding after syndrome bits"));
        }

        let count = r.u32("revealed count")? as usize;
        let mut revealed = Vec::with_capacity(count.min(1 << 20));
        for i in 0..count {
            let pos = r.u32("revealed position")?;
            let val = r.take(1, "revealed value")?[0];
            if val > 1 {
                return Err(Error::data(format!("revealed value {val} is not a bit")));
            }
            if let Some(&(prev, _)) = revealed.last() {
                if prev >= pos {
                    return Err(Error::data(format!(
                        "revealed positions out of order at entry {i}"
                    )));
                }
            }
            revealed.push((pos, val));
        }

        let tag_bits = r.u32("tag bit count")? as usize;
        if !(1..=64).contains(&tag_bits) {
            return Err(Error::data(format!("tag length {tag_bits} outside 1..=64")));
        }
        let tag_body = r.take(tag_bits.div_ceil(8), "tag body")?;
        let mut tag_le = [0u8; 8];
        tag_le[..tag_body.len()].copy_from_slice(tag_body);
        let tag = u64::from_le_bytes(tag_le);
        if tag_bits < 64 && tag >> tag_bits != 0 {
            return Err(Error::data("nonzero padding above tag bits"));
        }

        let function_seed = r.u64("hash function seed")?;
        let leakage_bits = r.u64("leakage ledger")?;
        if r.at != bytes.len() {
            return Err(Error::data(format!(
                "{} trailing bytes after transcript",
                bytes.len() - r.at
            )));
        }

        let expect = (syn_bits + revealed.len() + tag_bits) as u64;
        if leakage_bits != expect {
            return Err(Error::data(format!(
                "leakage ledger {leakage_bits} disagrees with sections {expect}"
            )));
        }
        Ok(ReconciliationTranscript {
            syndrome,
            revealed,
            hash_spec: HashSpec::new(function_seed, tag_bits)?,
            tag,
            leakage_bits,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.at.checked_add(len).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::data(format!(
                "transcript truncated in {what} at byte {}",
                self.at
            )));
        };
        let slice = &self.bytes[self.at..end];
        self.at = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::bits::random_bits;

    fn sample() -> ReconciliationTranscript {
        ReconciliationTranscript::new(
            vec![1, 0, 1, 1, 0, 0, 1, 0, 1],
            vec![(3, 1), (17, 0)],
            HashSpec::new(77, 34).unwrap(),
            0x2_2345_6789,
        )
    }

    #[test]
    fn ledger_counts_sections() {
        let t = sample();
        assert_eq!(t.leakage_bits, 9 + 2 + 34);
    }

    #[test]
    fn golden_bytes() {
        // 9 syndrome bits 101100101 -> 0xB2, 0x80; 34 tag bits in 5 bytes.
        let t = sample();
        let mut expect = vec![9, 0, 0, 0, 0xB2, 0x80];
        expect.extend_from_slice(&[2, 0, 0, 0]);
        expect.extend_from_slice(&[3, 0, 0, 0, 1]);
        expect.extend_from_slice(&[17, 0, 0, 0, 0]);
        expect.extend_from_slice(&[34, 0, 0, 0]);
        expect.extend_from_slice(&[0x89, 0x67, 0x45, 0x23, 0x02]);
        expect.extend_from_slice(&77u64.to_le_bytes());
        expect.extend_from_slice(&45u64.to_le_bytes());
        assert_eq!(t.to_bytes(), expect);
    }

    #[test]
    fn round_trip_random_transcripts() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let syn_len = rng.gen_range(1..400);
            let syn = random_bits(&mut rng, syn_len);
            let mut positions: Vec<u32> = (0..rng.gen_range(0..20u32)).collect();
            for p in &mut positions {
                *p = *p * 7 + rng.gen_range(0..3);
            }
            positions.sort_unstable();
            positions.dedup();
            let revealed: Vec<(u32, u8)> = positions
                .into_iter()
                .map(|p| (p, rng.gen_range(0..2u8)))
                .collect();
            let bits = rng.gen_range(1..=64usize);
            let spec = HashSpec::new(rng.gen(), bits).unwrap();
            let tag: u64 = if bits == 64 {
                rng.gen()
            } else {
                rng.gen::<u64>() & ((1 << bits) - 1)
            };
            let t = ReconciliationTranscript::new(syn, revealed, spec, tag);
            let back = ReconciliationTranscript::from_bytes(&t.to_bytes()).unwrap();
            assert_eq!(t, back);
        }
    }

    #[test]
    fn wire_length_is_exact() {
        let t = sample();
        let expect = 4 + 2 + 4 + 2 * 5 + 4 + 5 + 8 + 8;
        assert_eq!(t.to_bytes().len(), expect);
    }

    #[test]
    fn truncation_and_trailing_rejected() {
        let bytes = sample().to_bytes();
        for cut in [0, 3, 5, 11, bytes.len() - 1] {
            let err = ReconciliationTranscript::from_bytes(&bytes[..cut]).unwrap_err();
            assert!(err.to_string().contains("truncated"), "cut {cut}: {err}");
        }
        let mut extended = bytes.clone();
        extended.push(0);
        assert!(ReconciliationTranscript::from_bytes(&extended)
            .unwrap_err()
            .to_string()
            .contains("trailing"));
    }

    #[test]
    fn corrupted_ledger_rejected() {
        let mut bytes = sample().to_bytes();
        let at = bytes.len() - 8;
        bytes[at] ^= 1;
        assert!(ReconciliationTranscript::from_bytes(&bytes)
            .unwrap_err()
            .to_string()
            .contains("ledger"));
    }

    #[test]
    fn unordered_positions_rejected() {
        let t = ReconciliationTranscript::new(
            vec![1],
            vec![(9, 0), (4, 1)],
            HashSpec::new(1, 8).unwrap(),
            0,
        );
        assert!(ReconciliationTranscript::from_bytes(&t.to_bytes()).is_err());
    }

    #[test]
    fn nonzero_padding_rejected() {
        // Syndrome padding bit set.
        let mut bytes = sample().to_bytes();
        bytes[5] |= 0x01;
        assert!(ReconciliationTranscript::from_bytes(&bytes)
            .unwrap_err()
            .to_string()
            .contains("padding"));
    }
}
