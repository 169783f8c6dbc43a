//! Sum-product syndrome decoding on the binary symmetric channel.
//!
//! The decoder searches for a word whose syndrome equals a given target,
//! starting from per-position log-likelihood ratios. Sign convention:
//! positive LLR means bit 0 is more likely. Rate modulation enters through
//! the initialization: punctured positions start at 0 (no information),
//! revealed positions at saturation.

use crate::error::{Error, Result};
use crate::linear_code::SparseLinearCode;

/// Finite stand-in for infinite certainty, in natural-log units.
pub const LLR_MAX: f64 = 30.0;

/// Default iteration cap for [`decode`].
pub const DEFAULT_MAX_ITER: usize = 200;

/// Per-position log-likelihood ratios, clipped to `[-LLR_MAX, LLR_MAX]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector {
    values: Vec<f64>,
}

impl LlrVector {
    /// Clips every entry into the representable band.
    pub fn new(values: Vec<f64>) -> Self {
        let values = values
            .into_iter()
            .map(|v| v.clamp(-LLR_MAX, LLR_MAX))
            .collect();
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Outcome of a syndrome decode. `estimate` is the final hard decision
/// even when the decoder failed; `syndrome_matched` is the success marker
/// and implies `syndrome(estimate) == target`.
#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub estimate: Vec<u8>,
    pub iterations_used: usize,
    pub syndrome_matched: bool,
}

/// Channel log-likelihood ratio of a received 0 at crossover `eps`.
pub fn channel_llr(eps: f64) -> f64 {
    if eps <= 0.0 {
        LLR_MAX
    } else {
        (((1.0 - eps) / eps).ln()).min(LLR_MAX)
    }
}

/// Builds decoder input from a received word plus side information.
///
/// `y` spans the full block; entries at punctured or known positions are
/// ignored. Punctured positions get LLR 0, known positions `+-LLR_MAX`
/// signed by the revealed value, all others the channel LLR signed by `y`.
///
/// # Errors
///
/// Rejects a position in both `punctured` and `known`, out-of-range
/// positions, and crossover outside `[0, 0.5]`.
pub fn init_llr(
    y: &[u8],
    crossover: f64,
    punctured: &[usize],
    known: &[(usize, u8)],
) -> Result<LlrVector> {
    if !(0.0..=0.5).contains(&crossover) {
        return Err(Error::config(format!(
            "crossover {crossover} outside [0, 0.5]"
        )));
    }
    let n = y.len();
    let mut role = vec![0u8; n];
    for &p in punctured {
        if p >= n {
            return Err(Error::config(format!("punctured position {p} >= {n}")));
        }
        if role[p] != 0 {
            return Err(Error::config(format!("position {p} listed twice")));
        }
        role[p] = 1;
    }
    for &(p, _) in known {
        if p >= n {
            return Err(Error::config(format!("known position {p} >= {n}")));
        }
        if role[p] != 0 {
            return Err(Error::config(format!(
                "position {p} is both punctured and known"
            )));
        }
        role[p] = 2;
    }

    let ch = channel_llr(crossover);
    let mut values = vec![0.0; n];
    for (i, &bit) in y.iter().enumerate() {
        if role[i] == 0 {
            values[i] = if bit == 0 { ch } else { -ch };
        }
    }
    for &(p, v) in known {
        values[p] = if v == 0 { LLR_MAX } else { -LLR_MAX };
    }
    Ok(LlrVector { values })
}

/// Flooding sum-product decoding toward `target_syndrome`.
///
/// Check updates use the tanh rule with the sign flipped by the target
/// syndrome bit. After every iteration the hard decision is tested against
/// the target; on a match the decoder exits early. The all-known case
/// therefore resolves in one iteration.
///
/// # Errors
///
/// Dimension mismatches between `code`, `llr`, and `target_syndrome`.
pub fn decode(
    code: &SparseLinearCode,
    llr: &LlrVector,
    target_syndrome: &[u8],
    max_iter: usize,
) -> Result<DecodeResult> {
    let n = code.n();
    let m = code.num_checks();
    if llr.len() != n {
        return Err(Error::config(format!(
            "llr length {} does not match block length {n}",
            llr.len()
        )));
    }
    if target_syndrome.len() != m {
        return Err(Error::config(format!(
            "syndrome length {} does not match {m} checks",
            target_syndrome.len()
        )));
    }

    let rows: Vec<&[u32]> = code.checks().collect();
    // Messages are stored per edge in row-major order.
    let row_offset: Vec<usize> = rows
        .iter()
        .scan(0usize, |acc, r| {
            let o = *acc;
            *acc += r.len();
            Some(o)
        })
        .collect();
    let edges = code.edge_count();
    // chk_msg: check -> symbol, sym_msg: symbol -> check.
    let mut chk_msg = vec![0.0f64; edges];
    let mut sym_msg = vec![0.0f64; edges];
    for (ri, row) in rows.iter().enumerate() {
        for (j, &col) in row.iter().enumerate() {
            sym_msg[row_offset[ri] + j] = llr.values[col as usize];
        }
    }

    let mut posterior: Vec<f64> = llr.values.clone();
    let mut estimate = vec![0u8; n];
    let mut scratch: Vec<f64> = Vec::new();

    for iter in 1..=max_iter {
        // Check pass: product of tanh-halves of all other inputs, computed
        // with prefix/suffix products to avoid division.
        for (ri, row) in rows.iter().enumerate() {
            let o = row_offset[ri];
            let deg = row.len();
            scratch.clear();
            scratch.resize(2 * (deg + 1), 1.0);
            let (prefix, suffix) = scratch.split_at_mut(deg + 1);
            for j in 0..deg {
                prefix[j + 1] = prefix[j] * (sym_msg[o + j] * 0.5).tanh();
            }
            for j in (0..deg).rev() {
                suffix[j] = suffix[j + 1] * (sym_msg[o + j] * 0.5).tanh();
            }
            let flip = if target_syndrome[ri] == 1 { -1.0 } else { 1.0 };
            for j in 0..deg {
                let prod = (prefix[j] * suffix[j + 1] * flip).clamp(-0.999_999_999_999, 0.999_999_999_999);
                chk_msg[o + j] = (2.0 * prod.atanh()).clamp(-LLR_MAX, LLR_MAX);
            }
        }

        // Symbol pass: accumulate posteriors, then subtract per-edge.
        posterior.copy_from_slice(&llr.values);
        for (ri, row) in rows.iter().enumerate() {
            let o = row_offset[ri];
            for (j, &col) in row.iter().enumerate() {
                posterior[col as usize] += chk_msg[o + j];
            }
        }
        for (ri, row) in rows.iter().enumerate() {
            let o = row_offset[ri];
            for (j, &col) in row.iter().enumerate() {
                sym_msg[o + j] =
                    (posterior[col as usize] - chk_msg[o + j]).clamp(-LLR_MAX, LLR_MAX);
            }
        }

        for (i, &p) in posterior.iter().enumerate() {
            estimate[i] = (p < 0.0) as u8;
        }
        if code.syndrome(&estimate)? == target_syndrome {
            return Ok(DecodeResult {
                estimate,
                iterations_used: iter,
                syndrome_matched: true,
            });
        }
    }

    Ok(DecodeResult {
        estimate,
        iterations_used: max_iter,
        syndrome_matched: false,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::bits::{random_bits, xor};
    use crate::linear_code::{construct, DegreeDistribution};

    fn toy_code() -> SparseLinearCode {
        let dist = DegreeDistribution::regular(3, 6).unwrap();
        construct(&dist, 16, 9).unwrap()
    }

    /// Minimum-weight error pattern per syndrome, by exhaustive scan.
    pub(crate) fn coset_leader_table(code: &SparseLinearCode) -> Vec<(u32, u16)> {
        let n = code.n();
        let m = code.num_checks();
        assert!(n <= 20 && m <= 20, "exhaustive oracle is for toy codes");
        let masks: Vec<u32> = code
            .checks()
            .map(|row| row.iter().fold(0u32, |acc, &c| acc | 1 << c))
            .collect();
        let mut best: Vec<(u32, u16)> = vec![(u32::MAX, 0); 1 << m];
        for word in 0u32..1 << n {
            let mut syn = 0usize;
            for (b, &mask) in masks.iter().enumerate() {
                syn |= (((word & mask).count_ones() & 1) as usize) << b;
            }
            let w = word.count_ones();
            if w < best[syn].0 {
                best[syn] = (w, word as u16);
            }
        }
        best
    }

    fn word_bits(word: u16, n: usize) -> Vec<u8> {
        (0..n).map(|i| ((word >> i) & 1) as u8).collect()
    }

    #[test]
    fn channel_llr_example() {
        // log(0.9/0.1) in natural units.
        assert!((channel_llr(0.1) - 2.197).abs() < 1e-3);
        assert_eq!(channel_llr(0.0), LLR_MAX);
    }

    #[test]
    fn init_llr_roles() {
        let y = vec![0, 1, 0, 1];
        let llr = init_llr(&y, 0.1, &[1], &[(3, 1)]).unwrap();
        let v = llr.values();
        assert!((v[0] - 2.197).abs() < 1e-3);
        assert_eq!(v[1], 0.0);
        assert!((v[2] - 2.197).abs() < 1e-3);
        assert_eq!(v[3], -LLR_MAX);
    }

    #[test]
    fn init_llr_rejects_overlap_and_range() {
        let y = vec![0; 4];
        assert!(init_llr(&y, 0.1, &[1], &[(1, 0)]).is_err());
        assert!(init_llr(&y, 0.1, &[9], &[]).is_err());
        assert!(init_llr(&y, 0.7, &[], &[]).is_err());
        assert!(init_llr(&y, 0.1, &[2, 2], &[]).is_err());
    }

    #[test]
    fn all_known_resolves_in_one_iteration() {
        let code = toy_code();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_bits(&mut rng, code.n());
        let known: Vec<(usize, u8)> = x.iter().copied().enumerate().collect();
        let llr = init_llr(&vec![0; code.n()], 0.1, &[], &known).unwrap();
        let syn = code.syndrome(&x).unwrap();
        let res = decode(&code, &llr, &syn, 50).unwrap();
        assert!(res.syndrome_matched);
        assert_eq!(res.iterations_used, 1);
        assert_eq!(res.estimate, x);
    }

    #[test]
    fn noiseless_channel_returns_received_word() {
        let code = toy_code();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let y = random_bits(&mut rng, code.n());
        let llr = init_llr(&y, 0.0, &[], &[]).unwrap();
        let syn = code.syndrome(&y).unwrap();
        let res = decode(&code, &llr, &syn, 50).unwrap();
        assert!(res.syndrome_matched);
        assert_eq!(res.estimate, y);
    }

    #[test]
    fn dimension_mismatches_rejected() {
        let code = toy_code();
        let llr = LlrVector::new(vec![0.0; 8]);
        assert!(decode(&code, &llr, &vec![0; code.num_checks()], 10).is_err());
        let llr = LlrVector::new(vec![0.0; code.n()]);
        assert!(decode(&code, &llr, &[0, 0], 10).is_err());
    }

    #[test]
    fn single_flip_matches_coset_leader_oracle() {
        let code = toy_code();
        let leaders = coset_leader_table(&code);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let x = random_bits(&mut rng, code.n());
            let mut y = x.clone();
            let flip = rng.gen_range(0..code.n());
            y[flip] ^= 1;
            let syn = code.syndrome(&x).unwrap();
            let llr = init_llr(&y, 0.05, &[], &[]).unwrap();
            let res = decode(&code, &llr, &syn, DEFAULT_MAX_ITER).unwrap();
            assert!(res.syndrome_matched, "single flip must decode");
            let e_bp = xor(&res.estimate, &y);
            let w_bp: u32 = e_bp.iter().map(|&b| u32::from(b)).sum();
            let syn_e = code.syndrome(&e_bp).unwrap();
            let idx = syn_e
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &b)| acc | (b as usize) << i);
            assert_eq!(
                w_bp, leaders[idx].0,
                "estimate must reach the coset minimum weight"
            );
        }
    }

    #[test]
    fn success_implies_syndrome_match() {
        let code = toy_code();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut successes = 0;
        for _ in 0..200 {
            let x = random_bits(&mut rng, code.n());
            let y: Vec<u8> = x
                .iter()
                .map(|&b| b ^ u8::from(rng.gen_bool(0.05)))
                .collect();
            let syn = code.syndrome(&x).unwrap();
            let llr = init_llr(&y, 0.05, &[], &[]).unwrap();
            let res = decode(&code, &llr, &syn, 60).unwrap();
            if res.syndrome_matched {
                successes += 1;
                assert_eq!(code.syndrome(&res.estimate).unwrap(), syn);
            }
        }
        assert!(successes > 150, "decoder should mostly succeed: {successes}");
    }

    #[test]
    fn coset_shift_equivariance() {
        let code = toy_code();
        // Any nonzero word with zero syndrome works as the shift.
        let mut codeword = None;
        for word in 1u32..1 << code.n() {
            let bits = word_bits(word as u16, code.n());
            if code.syndrome(&bits).unwrap().iter().all(|&b| b == 0) {
                codeword = Some(bits);
                break;
            }
        }
        let c = codeword.expect("rate-1/2 toy code has nonzero codewords");

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let x = random_bits(&mut rng, code.n());
            let mut y = x.clone();
            y[rng.gen_range(0..code.n())] ^= 1;
            let syn = code.syndrome(&x).unwrap();
            let llr = init_llr(&y, 0.05, &[], &[]).unwrap();
            let base = decode(&code, &llr, &syn, 80).unwrap();

            let y_shift = xor(&y, &c);
            let x_shift = xor(&x, &c);
            let syn_shift = code.syndrome(&x_shift).unwrap();
            assert_eq!(syn, syn_shift, "codeword shift preserves the syndrome");
            let llr2 = init_llr(&y_shift, 0.05, &[], &[]).unwrap();
            let shifted = decode(&code, &llr2, &syn_shift, 80).unwrap();

            assert_eq!(base.syndrome_matched, shifted.syndrome_matched);
            if base.syndrome_matched {
                assert_eq!(xor(&base.estimate, &c), shifted.estimate);
            }
        }
    }

    #[test]
    fn side_information_never_hurts() {
        let dist = DegreeDistribution::regular(3, 6).unwrap();
        let code = construct(&dist, 512, 3).unwrap();
        let crossover = 0.07;
        let trials = 400;
        let mut fails = [0u32; 2];
        for (case, reveal) in [0usize, 26].into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            for _ in 0..trials {
                let x = random_bits(&mut rng, code.n());
                let y: Vec<u8> = x
                    .iter()
                    .map(|&b| b ^ u8::from(rng.gen_bool(crossover)))
                    .collect();
                let known: Vec<(usize, u8)> = (0..reveal).map(|i| (i * 19, x[i * 19])).collect();
                let syn = code.syndrome(&x).unwrap();
                let llr = init_llr(&y, crossover, &[], &known).unwrap();
                let res = decode(&code, &llr, &syn, 60).unwrap();
                if res.estimate != x {
                    fails[case] += 1;
                }
            }
        }
        // Binomial 3-sigma allowance on the difference.
        let sigma = (fails[0].max(1) as f64).sqrt();
        assert!(
            (fails[1] as f64) <= fails[0] as f64 + 3.0 * sigma,
            "revealing bits should not hurt: {} vs {}",
            fails[1],
            fails[0]
        );
    }
}
