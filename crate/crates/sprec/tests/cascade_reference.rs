//! Reference leakage rates for the interactive baseline, averaged over
//! enough trials to pin the mean well inside the quoted tolerances.

use sprec::cascade::{run_cascade, CascadeParams};
use sprec::channel::CorrelatedPair;

/// Mean leakage rate over `trials` fresh pairs.
fn mean_leakage(len: usize, qber: f64, trials: u64, seed_base: u64) -> f64 {
    let mut total = 0usize;
    for i in 0..trials {
        let pair = CorrelatedPair::generate(len, qber, seed_base + i).unwrap();
        let out = run_cascade(&pair.x, &pair.y, qber, &CascadeParams::classic(seed_base ^ i)).unwrap();
        assert_eq!(out.residual_errors, 0, "trial {i} left errors");
        total += out.parities_disclosed;
    }
    total as f64 / (trials as f64 * len as f64)
}

#[test]
fn length_1e4_qber_5pct_reference() {
    let rate = mean_leakage(10_000, 0.05, 100, 40_000);
    assert!((rate - 0.338).abs() < 0.002, "mean leakage {rate}");
}

#[test]
fn length_1e6_qber_1pct_reference_and_convergence() {
    let at_1e6 = mean_leakage(1_000_000, 0.01, 30, 50_000);
    assert!((at_1e6 - 0.0914).abs() < 0.0005, "mean leakage {at_1e6}");

    // Convergence across lengths: 1e5 agrees with 1e6 within 0.001.
    let at_1e5 = mean_leakage(100_000, 0.01, 60, 60_000);
    assert!(
        (at_1e5 - at_1e6).abs() < 0.001,
        "lengths disagree: {at_1e5} vs {at_1e6}"
    );
}

#[test]
fn independent_batches_agree_within_one_percent() {
    let a = mean_leakage(10_000, 0.05, 100, 70_000);
    let b = mean_leakage(10_000, 0.05, 100, 80_000);
    assert!((a - b).abs() / a < 0.01, "batch means {a} vs {b}");
}
