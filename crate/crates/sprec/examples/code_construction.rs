//! Builds a parity-check code from the built-in ensembles and saves it as
//! an alist file.
//!
//! Usage: code_construction [RATE] [N] [SEED] [OUT.alist]

use std::time::Instant;

use sprec::linear_code::{default_pool_distributions, load_alist, save_alist};

fn main() -> Result<(), sprec::Error> {
    let mut args = std::env::args().skip(1);
    let rate: f64 = args.next().map_or(0.65, |a| a.parse().expect("RATE"));
    let n: usize = args.next().map_or(20_000, |a| a.parse().expect("N"));
    let seed: u64 = args.next().map_or(7, |a| a.parse().expect("SEED"));
    let out = args.next().unwrap_or_else(|| "code.alist".into());

    let (design_rate, dist) = default_pool_distributions()
        .into_iter()
        .min_by(|a, b| {
            let da = (a.0 - rate).abs();
            let db = (b.0 - rate).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    println!("ensemble: design rate {design_rate}");
    println!("  lambda: {:?}", dist.lambda());
    println!("  rho:    {:?}", dist.rho());

    let t0 = Instant::now();
    let code = sprec::linear_code::construct(&dist, n, seed)?;
    println!(
        "constructed n={} checks={} edges={} rate={:.4} in {:.2?}",
        code.n(),
        code.num_checks(),
        code.edge_count(),
        code.rate(),
        t0.elapsed()
    );

    save_alist(&code, &out)?;
    let reloaded = load_alist(&out)?;
    assert_eq!(code, reloaded, "alist round-trip must be lossless");
    println!("saved to {out} (round-trip verified)");
    Ok(())
}
