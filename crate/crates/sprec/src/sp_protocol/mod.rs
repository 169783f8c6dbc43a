//! Rate-adaptive reconciliation over a one-way channel.
//!
//! Alice holds `x` (length `t`), Bob holds a noisy `y`. Alice extends `x`
//! with `d` fresh uniform bits into an n-bit block, reveals `s` of them,
//! and sends one message: the block's syndrome under the mother code, the
//! revealed values, and a verification tag. Bob decodes and answers with a
//! single status bit. Revealing more symbols lowers the effective code
//! rate, so one mother code serves a band of error rates; the exact
//! information cost of every run is kept in an integer ledger.
//!
//! Placement of the `d` extension symbols inside the block and the choice
//! of which `s` to reveal are both drawn from streams seeded by the shared
//! protocol seed, so the parties agree on them without extra messages.

mod hash;
mod transcript;

pub use hash::{gf_mul, hash_verify, tag_bits_for, HashSpec};
pub use transcript::ReconciliationTranscript;

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::random_bits;
use crate::channel::CorrelatedPair;
use crate::decoder::{decode, init_llr, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::linear_code::SparseLinearCode;

/// Stream ids for the per-run seeded randomness.
const STREAM_PLACEMENT: u64 = 0;
const STREAM_EXTENSION: u64 = 1;
const STREAM_REVEAL: u64 = 2;
const STREAM_HASH: u64 = 3;

/// One reconciliation configuration: mother code plus modulation counts.
#[derive(Debug, Clone)]
pub struct SpParams {
    code: Arc<SparseLinearCode>,
    d: usize,
    s: usize,
    eps_ec: f64,
    seed: u64,
}

impl SpParams {
    /// # Errors
    ///
    /// Requires `s <= d < n` and a verification bound representable as a
    /// tag (see [`tag_bits_for`]).
    pub fn new(code: Arc<SparseLinearCode>, d: usize, s: usize, eps_ec: f64, seed: u64) -> Result<Self> {
        if d >= code.n() {
            return Err(Error::config(format!(
                "modulation count {d} must be below the block length {}",
                code.n()
            )));
        }
        if s > d {
            return Err(Error::config(format!("revealed count {s} exceeds {d}")));
        }
        tag_bits_for(eps_ec)?;
        Ok(SpParams {
            code,
            d,
            s,
            eps_ec,
            seed,
        })
    }

    pub fn code(&self) -> &SparseLinearCode {
        &self.code
    }

    /// Modulation symbol count `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Revealed symbol count `s`.
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn eps_ec(&self) -> f64 {
        self.eps_ec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw string length `t = n - d`.
    pub fn t(&self) -> usize {
        self.code.n() - self.d
    }

    /// Same configuration with a different revealed count.
    ///
    /// # Errors
    ///
    /// `s` must not exceed `d`.
    pub fn with_s(&self, s: usize) -> Result<Self> {
        SpParams::new(self.code.clone(), self.d, s, self.eps_ec, self.seed)
    }

    /// Positions of the `d` extension symbols in the n-block, sorted.
    ///
    /// Both parties derive this from the shared seed (Step 0 agreement).
    pub fn extension_positions(&self) -> Vec<usize> {
        let mut rng = stream(self.seed, STREAM_PLACEMENT);
        let mut positions = sample(&mut rng, self.code.n(), self.d).into_vec();
        positions.sort_unstable();
        positions
    }
}

/// Derives one of the decorrelated per-run randomness streams.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Effective code rate after modulation: `(k - s)/(n - d)`.
///
/// Revealing a symbol converts it from pure puncturing to shortening and
/// lowers the rate; `s = 0` gives `k/(n-d)`, `s = d` gives `(k-d)/(n-d)`.
///
/// # Errors
///
/// Requires `s <= d < n`, `k <= n`, and `s <= k`.
pub fn adapted_rate(n: usize, k: usize, d: usize, s: usize) -> Result<f64> {
    check_rate_arguments(n, k, d, s)?;
    Ok((k - s) as f64 / (n - d) as f64)
}

fn check_rate_arguments(n: usize, k: usize, d: usize, s: usize) -> Result<()> {
    if d >= n {
        return Err(Error::config(format!(
            "modulation count {d} must be below the block length {n}"
        )));
    }
    if s > d {
        return Err(Error::config(format!("revealed count {s} exceeds {d}")));
    }
    if k > n {
        return Err(Error::config(format!("dimension {k} exceeds length {n}")));
    }
    if s > k {
        return Err(Error::config(format!(
            "revealed count {s} exceeds the dimension {k}"
        )));
    }
    Ok(())
}

/// Min-entropy charge of a run against the `t`-bit raw string, in bits:
/// `t(1 - R) + ceil(log2 1/eps_ec)` with `R` the adapted rate.
///
/// The product is the exact integer `(n - k) + s - d`, so the result is
/// computed without rounding.
///
/// # Errors
///
/// Same domain as [`adapted_rate`]; additionally `k - s` may not exceed
/// `t` (a code with more free dimensions than raw bits leaks nothing and
/// falls outside the accounting).
pub fn equivalent_leakage(n: usize, k: usize, d: usize, s: usize, eps_ec: f64) -> Result<u64> {
    check_rate_arguments(n, k, d, s)?;
    let t = n - d;
    if k - s > t {
        return Err(Error::config(format!(
            "dimension {k} minus revealed {s} exceeds the raw length {t}"
        )));
    }
    Ok((t - (k - s) + tag_bits_for(eps_ec)?) as u64)
}

/// Maps revealed counts to the highest crossover the configuration can
/// decode, from density evolution or an empirical sweep. Entries are
/// sorted by `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    entries: Vec<(usize, f64)>,
}

impl ThresholdTable {
    /// # Errors
    ///
    /// Entries must be non-empty, strictly increasing in `s`, with
    /// thresholds in `(0, 0.5]`.
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::config("threshold table is empty"));
        }
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::config(format!(
                    "table entries out of order at s = {}",
                    w[1].0
                )));
            }
        }
        for &(s, th) in &entries {
            if !th.is_finite() || th <= 0.0 || th > 0.5 {
                return Err(Error::config(format!(
                    "threshold {th} at s = {s} outside (0, 0.5]"
                )));
            }
        }
        Ok(ThresholdTable { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// Largest tabulated `s`.
    pub fn max_s(&self) -> usize {
        self.entries.last().unwrap().0
    }

    /// Smallest tabulated `s` whose threshold clears `p_e + margin`.
    ///
    /// # Errors
    ///
    /// When even the last entry falls short the protocol must abort; this
    /// surfaces as a runtime error carrying the ceiling.
    pub fn choose_s(&self, p_e: f64, margin: f64) -> Result<usize> {
        if !(0.0..=0.5).contains(&p_e) {
            return Err(Error::config(format!("error rate {p_e} outside [0, 0.5]")));
        }
        if !margin.is_finite() || margin < 0.0 {
            return Err(Error::config(format!("margin {margin} must be >= 0")));
        }
        let need = p_e + margin;
        for &(s, th) in &self.entries {
            if th > need {
                return Ok(s);
            }
        }
        Err(Error::runtime(format!(
            "error rate {p_e} + margin {margin} is above the table ceiling {}; abort",
            self.entries.last().unwrap().1
        )))
    }
}

/// Half a standard deviation of a QBER estimate from `sample_size`
/// disclosed bits, the default safety margin for [`ThresholdTable::choose_s`].
pub fn qber_margin(estimate: f64, sample_size: usize) -> f64 {
    if sample_size == 0 {
        return 0.0;
    }
    0.5 * (estimate * (1.0 - estimate) / sample_size as f64).sqrt()
}

/// Final protocol status after the verification exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Reconciled,
    HashAbort,
}

/// Result of one protocol run as seen by both parties.
#[derive(Debug, Clone)]
pub struct SpOutcome {
    pub status: SpStatus,
    /// Alice's extended block; present only on success.
    pub alice_key: Option<Vec<u8>>,
    /// Bob's decoded block; present only on success.
    pub bob_key: Option<Vec<u8>>,
    pub decoder_iterations: usize,
}

/// Executes Steps 1-3 for one block: extend, transmit, decode, verify.
///
/// `p_e` is the crossover estimate used for Bob's channel LLRs. The
/// decoder's failure or success is never trusted directly: both parties
/// always compare tags, so an undetected mismatch survives with
/// probability at most `eps_ec`.
///
/// # Errors
///
/// `pair.x` must have length `t = n - d` and `p_e` must lie in `[0, 0.5]`.
pub fn run(pair: &CorrelatedPair, p_e: f64, params: &SpParams) -> Result<(ReconciliationTranscript, SpOutcome)> {
    let n = params.code.n();
    let (d, s, t) = (params.d, params.s, params.t());
    if pair.x.len() != t || pair.y.len() != t {
        return Err(Error::config(format!(
            "raw strings must have length {t}, got {}",
            pair.x.len()
        )));
    }

    let ext_positions = params.extension_positions();
    let in_extension = {
        let mut mask = vec![false; n];
        for &p in &ext_positions {
            mask[p] = true;
        }
        mask
    };

    // Alice: extend x with d uniform bits at the agreed positions.
    let ext_values = random_bits(&mut stream(params.seed, STREAM_EXTENSION), d);
    let mut alice_block = vec![0u8; n];
    let mut bob_channel = vec![0u8; n];
    {
        let mut next_ext = 0;
        let mut next_raw = 0;
        for i in 0..n {
            if in_extension[i] {
                alice_block[i] = ext_values[next_ext];
                next_ext += 1;
            } else {
                alice_block[i] = pair.x[next_raw];
                bob_channel[i] = pair.y[next_raw];
                next_raw += 1;
            }
        }
    }
    let syndrome = params.code.syndrome(&alice_block)?;

    // Reveal s of the d extension symbols, chosen from the shared stream.
    let mut reveal_idx = sample(&mut stream(params.seed, STREAM_REVEAL), d, s).into_vec();
    reveal_idx.sort_unstable();
    let revealed: Vec<(u32, u8)> = reveal_idx
        .iter()
        .map(|&i| (ext_positions[i] as u32, ext_values[i]))
        .collect();

    let hash_spec = HashSpec::new(
        stream(params.seed, STREAM_HASH).gen(),
        tag_bits_for(params.eps_ec)?,
    )?;
    let alice_tag = hash_spec.tag(&alice_block);
    let transcript = ReconciliationTranscript::new(syndrome, revealed, hash_spec, alice_tag);

    // Bob: remaining d - s extension positions are punctured.
    let revealed_set: Vec<usize> = reveal_idx.iter().map(|&i| ext_positions[i]).collect();
    let punctured: Vec<usize> = ext_positions
        .iter()
        .copied()
        .filter(|p| revealed_set.binary_search(p).is_err())
        .collect();
    let known: Vec<(usize, u8)> = transcript
        .revealed
        .iter()
        .map(|&(p, v)| (p as usize, v))
        .collect();
    let llr = init_llr(&bob_channel, p_e, &punctured, &known)?;
    let decoded = decode(&params.code, &llr, &transcript.syndrome, DEFAULT_MAX_ITER)?;

    let bob_tag = hash_spec.tag(&decoded.estimate);
    let matched = bob_tag == transcript.tag;
    let outcome = SpOutcome {
        status: if matched {
            SpStatus::Reconciled
        } else {
            SpStatus::HashAbort
        },
        alice_key: matched.then(|| alice_block),
        bob_key: matched.then(|| decoded.estimate),
        decoder_iterations: decoded.iterations_used,
    };
    Ok((transcript, outcome))
}
