//! Offline search for the pool lambda tables. Not part of the library
//! surface; run manually, paste results into linear_code/pool.rs, delete.

use std::env;
use std::sync::Arc;
use std::time::Instant;

use sprec::channel::CorrelatedPair;
use sprec::density_evolution::{evolve, EnsembleSpec, GridSpec};
use sprec::linear_code::{construct, default_pool_distributions, DegreeDistribution};
use sprec::sp_protocol::{self, SpParams, SpStatus};

const D_OVER_N: f64 = 0.05;

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Inverse of h on [0, 1/2].
fn entropy_inv(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn converges_fast(spec: &EnsembleSpec, eps: f64, grid: &GridSpec, rounds: usize) -> bool {
    evolve(spec, eps, grid, rounds, 1e-6)
        .map(|r| r.converged)
        .unwrap_or(false)
}

/// Bisection seeded from the Shannon bound for the spec's leak rate.
fn fast_threshold(spec: &EnsembleSpec, grid: &GridSpec, tol: f64, rounds: usize) -> f64 {
    let rate = spec.dist().design_rate();
    let leak = ((1.0 - rate) - D_OVER_N + spec.sigma()) / (1.0 - D_OVER_N);
    let mut hi = entropy_inv(leak.min(0.999)).min(0.499).max(1e-3);
    let mut lo = 0.5 * hi;
    while !converges_fast(spec, lo, grid, rounds) {
        lo *= 0.5;
        if lo < 1e-5 {
            return 0.0;
        }
    }
    // The converse forbids convergence above `hi`, but the quantized
    // engine is checked, not trusted.
    while converges_fast(spec, hi, grid, rounds) {
        let step = hi - lo;
        lo = hi;
        hi = (hi + step).min(0.499);
        if hi >= 0.499 {
            return hi;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if converges_fast(spec, mid, grid, rounds) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn punctured_threshold(
    lambda: &[(usize, f64)],
    rate: f64,
    sigma: f64,
    grid: &GridSpec,
    tol: f64,
    rounds: usize,
) -> Option<f64> {
    let dist = DegreeDistribution::with_target_rate(lambda.to_vec(), rate).ok()?;
    let spec = EnsembleSpec::new(dist, D_OVER_N - sigma, sigma).ok()?;
    Some(fast_threshold(&spec, grid, tol, rounds))
}

fn clamp_candidate(a2: f64, a3: f64) -> Option<(f64, f64)> {
    let a8 = 1.0 - a2 - a3;
    if a2 < 0.02 || a3 < 0.0 || a8 < 0.02 {
        return None;
    }
    Some((a2, a3))
}

fn search_rate(rate: f64, seed: (f64, f64), grid: &GridSpec, rounds: usize) -> ((f64, f64), f64) {
    let tol = 2.5e-4;
    let eval = |a2: f64, a3: f64| -> Option<f64> {
        let (a2, a3) = clamp_candidate(a2, a3)?;
        let lambda = [(2, a2), (3, a3), (8, 1.0 - a2 - a3)];
        punctured_threshold(&lambda, rate, 0.0, grid, tol, rounds)
    };
    let (mut best_pt, mut best) = (seed, eval(seed.0, seed.1).unwrap_or(0.0));
    println!("rate {rate:.2}: seed {best_pt:?} -> {best:.4}");
    let mut step = 0.04;
    let mut evals = 1usize;
    while step >= 0.005 {
        let (a2, a3) = best_pt;
        let neighbors = [
            (a2 + step, a3),
            (a2 - step, a3),
            (a2, a3 + step),
            (a2, a3 - step),
            (a2 + step, a3 - step),
            (a2 - step, a3 + step),
        ];
        let mut improved = false;
        for (na2, na3) in neighbors {
            if let Some(th) = eval(na2, na3) {
                evals += 1;
                if th > best + tol {
                    best = th;
                    best_pt = (na2, na3);
                    improved = true;
                    println!("  -> ({na2:.3}, {na3:.3}) threshold {th:.4}");
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    println!(
        "rate {rate:.2}: best lambda ({:.3}, {:.3}, {:.3}) threshold {best:.4} [{evals} evals]",
        best_pt.0,
        best_pt.1,
        1.0 - best_pt.0 - best_pt.1
    );
    (best_pt, best)
}

/// Independent reference: normalized min-sum syndrome decoding.
fn min_sum(
    rows: &[Vec<u32>],
    n: usize,
    y: &[u8],
    q: f64,
    syn: &[u8],
    x_true: &[u8],
) -> (bool, usize, usize) {
    let ch = ((1.0 - q) / q).ln();
    let prior: Vec<f64> = y.iter().map(|&b| if b == 0 { ch } else { -ch }).collect();
    let offsets: Vec<usize> = rows
        .iter()
        .scan(0usize, |acc, r| {
            let o = *acc;
            *acc += r.len();
            Some(o)
        })
        .collect();
    let edges: usize = rows.iter().map(Vec::len).sum();
    let mut c2v = vec![0.0f64; edges];
    let mut v2c = vec![0.0f64; edges];
    for (ri, row) in rows.iter().enumerate() {
        for (j, &col) in row.iter().enumerate() {
            v2c[offsets[ri] + j] = prior[col as usize];
        }
    }
    let mut est = vec![0u8; n];
    for iter in 1..=200 {
        for (ri, row) in rows.iter().enumerate() {
            let o = offsets[ri];
            let deg = row.len();
            // Two smallest magnitudes and total sign.
            let (mut m1, mut m2, mut arg1) = (f64::INFINITY, f64::INFINITY, 0);
            let mut neg = syn[ri] == 1;
            for j in 0..deg {
                let v = v2c[o + j];
                neg ^= v < 0.0;
                let a = v.abs();
                if a < m1 {
                    m2 = m1;
                    m1 = a;
                    arg1 = j;
                } else if a < m2 {
                    m2 = a;
                }
            }
            for j in 0..deg {
                let mag = 0.8 * if j == arg1 { m2 } else { m1 };
                let self_neg = v2c[o + j] < 0.0;
                let sign = if neg ^ self_neg { -1.0 } else { 1.0 };
                c2v[o + j] = sign * mag;
            }
        }
        let mut post = prior.clone();
        for (ri, row) in rows.iter().enumerate() {
            for (j, &col) in row.iter().enumerate() {
                post[col as usize] += c2v[offsets[ri] + j];
            }
        }
        for (ri, row) in rows.iter().enumerate() {
            for (j, &col) in row.iter().enumerate() {
                v2c[offsets[ri] + j] = post[col as usize] - c2v[offsets[ri] + j];
            }
        }
        for i in 0..n {
            est[i] = u8::from(post[i] < 0.0);
        }
        let mut ok = true;
        'chk: for (ri, row) in rows.iter().enumerate() {
            let mut p = 0u8;
            for &col in row {
                p ^= est[col as usize];
            }
            if p != syn[ri] {
                ok = false;
                break 'chk;
            }
        }
        if ok {
            let dist = est.iter().zip(x_true).filter(|(a, b)| a != b).count();
            return (true, iter, dist);
        }
    }
    let dist = est.iter().zip(x_true).filter(|(a, b)| a != b).count();
    (false, 200, dist)
}

fn placeholder_table() -> Vec<(f64, (f64, f64))> {
    vec![
        (0.40, (0.28, 0.26)),
        (0.45, (0.27, 0.26)),
        (0.50, (0.26, 0.25)),
        (0.55, (0.26, 0.25)),
        (0.60, (0.25, 0.25)),
        (0.65, (0.24, 0.25)),
        (0.70, (0.23, 0.25)),
        (0.75, (0.22, 0.26)),
        (0.80, (0.21, 0.27)),
        (0.85, (0.20, 0.28)),
        (0.90, (0.19, 0.28)),
    ]
}

fn main() {
    let args: Vec<String> = env::args().skip(1).collect();
    let mode = args.first().map(String::as_str).unwrap_or("measure");
    let grid = GridSpec::new(512).unwrap();
    match mode {
        // Thresholds of the current table at sigma = 0, full puncture.
        "measure" => {
            for (rate, (a2, a3)) in placeholder_table() {
                let t0 = Instant::now();
                let lambda = [(2, a2), (3, a3), (8, 1.0 - a2 - a3)];
                let th = punctured_threshold(&lambda, rate, 0.0, &grid, 2.5e-4, 800);
                let shannon = entropy_inv(((1.0 - rate) - D_OVER_N) / (1.0 - D_OVER_N));
                println!(
                    "rate {rate:.2}: punctured threshold {th:?} shannon {shannon:.4} ({:.1}s)",
                    t0.elapsed().as_secs_f64()
                );
            }
        }
        // checkgraph <pool|regular> <rate> <n>
        "checkgraph" => {
            let kind = args.get(1).map(String::as_str).unwrap_or("regular");
            let rate: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);
            let n: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10_000);
            let dist = if kind == "regular" {
                DegreeDistribution::regular(3, 6).unwrap()
            } else {
                default_pool_distributions()
                    .into_iter()
                    .find(|(r, _)| (r - rate).abs() < 1e-6)
                    .expect("rate not in pool")
                    .1
            };
            let code = construct(&dist, n, 999).unwrap();
            let rows: Vec<Vec<u32>> = code.checks().map(|r| r.to_vec()).collect();
            let mut dup_in_row = 0usize;
            let mut sym_deg = vec![0u32; n];
            for row in &rows {
                let mut sorted = row.clone();
                sorted.sort_unstable();
                dup_in_row += sorted.windows(2).filter(|w| w[0] == w[1]).count();
                for &c in row {
                    sym_deg[c as usize] += 1;
                }
            }
            let mut pair_counts = std::collections::HashMap::new();
            for row in &rows {
                let mut sorted = row.clone();
                sorted.sort_unstable();
                for i in 0..sorted.len() {
                    for j in i + 1..sorted.len() {
                        *pair_counts.entry((sorted[i], sorted[j])).or_insert(0u32) += 1;
                    }
                }
            }
            let four_cycles: usize = pair_counts
                .values()
                .map(|&c| (c as usize) * (c as usize - 1) / 2)
                .sum();
            let mut deg_hist = std::collections::BTreeMap::new();
            for &d in &sym_deg {
                *deg_hist.entry(d).or_insert(0usize) += 1;
            }
            let row_degs: std::collections::BTreeMap<usize, usize> =
                rows.iter().fold(Default::default(), |mut m, r| {
                    *m.entry(r.len()).or_insert(0) += 1;
                    m
                });
            println!(
                "n {n} checks {} edges {} dup-in-row {dup_in_row} four_cycles {four_cycles}"
                , code.num_checks(), code.edge_count()
            );
            println!("symbol degree hist {deg_hist:?}");
            println!("check degree hist {row_degs:?}");
            // Connected components over the bipartite graph.
            let mut sym_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
            for (ri, row) in rows.iter().enumerate() {
                for &c in row {
                    sym_adj[c as usize].push(ri as u32);
                }
            }
            let mut seen_sym = vec![false; n];
            let mut seen_chk = vec![false; rows.len()];
            let mut components = Vec::new();
            for start in 0..n {
                if seen_sym[start] {
                    continue;
                }
                let mut size = 0usize;
                let mut stack = vec![start];
                seen_sym[start] = true;
                while let Some(s) = stack.pop() {
                    size += 1;
                    for &ri in &sym_adj[s] {
                        if !seen_chk[ri as usize] {
                            seen_chk[ri as usize] = true;
                            for &c in &rows[ri as usize] {
                                if !seen_sym[c as usize] {
                                    seen_sym[c as usize] = true;
                                    stack.push(c as usize);
                                }
                            }
                        }
                    }
                }
                components.push(size);
            }
            components.sort_unstable_by(|a, b| b.cmp(a));
            println!(
                "{} component(s); sizes (top 8) {:?}",
                components.len(),
                &components[..components.len().min(8)]
            );
            // Local spread proxy: mean absolute column distance within rows.
            let spread: f64 = rows
                .iter()
                .flat_map(|row| {
                    row.windows(2)
                        .map(|w| (w[1] as i64 - w[0] as i64).unsigned_abs() as f64)
                })
                .sum::<f64>()
                / code.edge_count() as f64;
            println!("mean within-row column gap {spread:.1} (uniform would be ~n/deg)");
        }
        // decode <pool|regular> <rate> <n> <q> <trials>
        "decode" => {
            let kind = args.get(1).map(String::as_str).unwrap_or("regular");
            let rate: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);
            let n: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10_000);
            let q: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.05);
            let trials: u64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(10);
            let dist = if kind == "regular" {
                DegreeDistribution::regular(3, 6).unwrap()
            } else {
                default_pool_distributions()
                    .into_iter()
                    .find(|(r, _)| (r - rate).abs() < 1e-6)
                    .expect("rate not in pool")
                    .1
            };
            let code = construct(&dist, n, 999).unwrap();
            let rows: Vec<Vec<u32>> = code.checks().map(|r| r.to_vec()).collect();
            for trial in 0..trials {
                let pair = CorrelatedPair::generate(n, q, 30_000 + trial).unwrap();
                let mismatch: usize = pair
                    .x
                    .iter()
                    .zip(&pair.y)
                    .filter(|(a, b)| a != b)
                    .count();
                let syn = code.syndrome(&pair.x).unwrap();
                let manual: Vec<u8> = rows
                    .iter()
                    .map(|row| row.iter().fold(0u8, |p, &c| p ^ pair.x[c as usize]))
                    .collect();
                println!(
                    "trial {trial}: true qber {:.4} syndrome-consistent {}",
                    mismatch as f64 / n as f64,
                    manual == syn
                );
                let llr = sprec::decoder::init_llr(&pair.y, q, &[], &[]).unwrap();
                let res = sprec::decoder::decode(&code, &llr, &syn, 200).unwrap();
                let dist_lib: usize = res
                    .estimate
                    .iter()
                    .zip(&pair.x)
                    .filter(|(a, b)| a != b)
                    .count();
                let (ms_ok, ms_iters, ms_dist) = min_sum(&rows, n, &pair.y, q, &syn, &pair.x);
                println!(
                    "trial {trial}: lib matched {} iters {} dist {dist_lib} | minsum matched {ms_ok} iters {ms_iters} dist {ms_dist}",
                    res.syndrome_matched, res.iterations_used
                );
            }
        }
        // dump <pool|regular> <rate> <n> <file>
        "dump" => {
            let kind = args.get(1).map(String::as_str).unwrap_or("regular");
            let rate: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);
            let n: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10_000);
            let path = args.get(4).map(String::as_str).unwrap_or("/tmp/code.alist");
            let dist = if kind == "regular" {
                DegreeDistribution::regular(3, 6).unwrap()
            } else {
                default_pool_distributions()
                    .into_iter()
                    .find(|(r, _)| (r - rate).abs() < 1e-6)
                    .expect("rate not in pool")
                    .1
            };
            let code = construct(&dist, n, 999).unwrap();
            sprec::linear_code::save_alist(&code, path).unwrap();
            println!("wrote {path}: n {n} checks {}", code.num_checks());
        }
        // protocol <pool|regular> <rate> <n> <q> <d> <s> <trials>
        "protocol" => {
            let kind = args.get(1).map(String::as_str).unwrap_or("pool");
            let rate: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);
            let n: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10_000);
            let q: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.05);
            let d: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(500);
            let s: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(0);
            let trials: u64 = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(5);
            let dist = if kind == "regular" {
                DegreeDistribution::regular(3, 6).unwrap()
            } else {
                default_pool_distributions()
                    .into_iter()
                    .find(|(r, _)| (r - rate).abs() < 1e-6)
                    .expect("rate not in pool")
                    .1
            };
            let t0 = Instant::now();
            let code = Arc::new(construct(&dist, n, 999).unwrap());
            println!(
                "{kind} code n {n} k {} rate {:.3} built in {:.1}s",
                code.k(),
                code.rate(),
                t0.elapsed().as_secs_f64()
            );
            let mut ok = 0;
            for trial in 0..trials {
                let params = SpParams::new(code.clone(), d, s, 1e-10, 10_000 + trial).unwrap();
                let pair = CorrelatedPair::generate(params.t(), q, 20_000 + trial).unwrap();
                let t1 = Instant::now();
                let (_, out) = sp_protocol::run(&pair, q, &params).unwrap();
                let good = out.status == SpStatus::Reconciled;
                ok += u64::from(good);
                println!(
                    "  trial {trial}: {:?} iters {} ({:.1}s)",
                    out.status,
                    out.decoder_iterations,
                    t1.elapsed().as_secs_f64()
                );
            }
            println!("{ok}/{trials} reconciled at q {q}, d {d}, s {s}");
        }
        "search" => {
            let from: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.40);
            let to: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.90);
            let mut results = Vec::new();
            let mut seed = None;
            for (rate, table_seed) in placeholder_table() {
                if rate < from - 1e-9 || rate > to + 1e-9 {
                    continue;
                }
                let t0 = Instant::now();
                let s = seed.unwrap_or(table_seed);
                let (pt, th) = search_rate(rate, s, &grid, 800);
                seed = Some(pt);
                println!("  elapsed {:.1}s", t0.elapsed().as_secs_f64());
                results.push((rate, pt, th));
            }
            println!("\nfrozen table candidates:");
            for (rate, (a2, a3), th) in &results {
                let shannon = entropy_inv(((1.0 - rate) - D_OVER_N) / (1.0 - D_OVER_N));
                println!(
                    "    ({rate:.2}, &[(2, {a2:.3}), (3, {a3:.3}), (8, {:.3})]), // th {th:.4} / sh {shannon:.4} = {:.3}",
                    1.0 - a2 - a3,
                    th / shannon
                );
            }
        }
        other => eprintln!("unknown mode {other}"),
    }
}
