//! Rate-adaptive information reconciliation for correlated bit strings.
//!
//! Two parties hold noisy copies of a bit string (a sifted key, correlated
//! through a binary symmetric channel) and must agree on a common string
//! while revealing as little as possible. This crate implements a one-way
//! syndrome-based protocol whose rate is adapted per block by puncturing and
//! shortening a mother LDPC code, alongside the interactive Cascade baseline,
//! and the analysis tools needed to compare them:
//!
//! * [`channel`]: channel model and error-rate estimation,
//! * [`linear_code`]: sparse parity-check codes, construction, alist I/O,
//! * [`decoder`]: syndrome belief-propagation decoding,
//! * [`sp_protocol`]: the rate-adaptive protocol and its leakage ledger,
//! * [`cascade`]: the Cascade baseline with exact parity counting,
//! * [`density_evolution`]: asymptotic thresholds and leakage curves,
//! * [`finite_key`]: secret-key rates with finite-size corrections,
//! * [`harness`]: seeded experiment driver behind the `sprec` binary.
//!
//! Every randomized operation takes an explicit seed: equal seeds give
//! bit-identical results, including across the parallel experiment harness.
//!
//! Runnable walkthroughs live in `examples/`; each major capability has one
//! (`cargo run --example reconcile_block`, `cascade_run`, `de_threshold`,
//! `leakage_curve`, `finite_key_rate`, `code_construction`).

pub mod bits;
pub mod channel;
pub mod cascade;
pub mod decoder;
pub mod density_evolution;
pub mod finite_key;
pub mod harness;
pub mod sp_protocol;
pub mod error;
pub mod linear_code;

pub use error::{Error, Result};
