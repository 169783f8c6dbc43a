//! The four experiment drivers behind the command-line interface.
//!
//! Each driver consumes a validated [`ExperimentConfig`] and produces a
//! CSV document plus human-readable summary lines. Trials are seeded
//! through [`seed_stream`] from (master seed, cell, trial) so results
//! are byte-identical across runs and thread counts; timing never
//! enters the CSV.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::cascade::{leakage_rate, run_cascade, CascadeParams};
use crate::channel::{estimate_qber, CorrelatedPair};
use crate::density_evolution::{
    asymptotic_leakage_curve, build_threshold_table, GridSpec, PoolMember,
};
use crate::error::{Error, Result};
use crate::finite_key::{binary_entropy, optimize_plan, FiniteKeyBudget, LeakModel};
use crate::harness::config::{ExperimentConfig, ProtocolTag, SingleRunConfig};
use crate::harness::report::{cell, cell_sci, mean_stderr, CsvDocument};
use crate::harness::seed_stream;
use crate::linear_code::{
    construct, default_pool_distributions, member_rate, member_thresholds, nearest_member,
    plan_modulation, DegreeDistribution, SparseLinearCode, POOL_SIGMA_GRID,
};
use crate::sp_protocol::{self, qber_margin, SpParams, SpStatus, ThresholdTable};

/// Finished experiment: the CSV to write and the summary to print.
pub struct RunOutput {
    pub doc: CsvDocument,
    pub summary: Vec<String>,
}

/// Coefficient of the 1/sqrt(n) term added to the error-rate margin when
/// selecting the reveal count, covering the finite-length gap to the
/// ensemble threshold.
pub const FINITE_MARGIN_COEFF: f64 = 1.5;

/// Independent per-trial seed; sub-draws within a trial use
/// `seed_stream(trial_seed, k)`.
fn trial_seed(master: u64, cell_index: u64, trial: u64) -> u64 {
    seed_stream(master, (cell_index << 32) | trial)
}

fn sorted_f64(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Mean Cascade leakage rate and its standard error at one crossover.
fn cascade_reference(
    qber: f64,
    length: usize,
    trials: usize,
    master: u64,
    cell_index: u64,
) -> Result<(f64, f64, usize)> {
    let runs = (0..trials)
        .into_par_iter()
        .map(|i| {
            let ts = trial_seed(master, cell_index, i as u64);
            let pair = CorrelatedPair::generate(length, qber, seed_stream(ts, 0))?;
            let params = CascadeParams::classic(seed_stream(ts, 1));
            let out = run_cascade(&pair.x, &pair.y, qber, &params)?;
            Ok((leakage_rate(&out, length)?, out.residual_errors))
        })
        .collect::<Result<Vec<(f64, usize)>>>()?;
    let rates: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let residual_trials = runs.iter().filter(|r| r.1 > 0).count();
    let (mean, se) = mean_stderr(&rates);
    Ok((mean, se, residual_trials))
}

pub(crate) fn cascade_table(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let tc = cfg.cascade_table.as_ref().expect("dispatch checked the kind");
    let qbers = sorted_f64(&tc.qbers);
    let mut lengths = tc.lengths.clone();
    lengths.sort_unstable();

    let mut doc = CsvDocument::new(
        cfg,
        "qber,length,trials,mean_leak_rate,std_error,mean_efficiency",
    );
    let mut summary = Vec::new();
    let mut residual_total = 0;
    let mut cell_index = 0u64;
    for &q in &qbers {
        for &len in &lengths {
            let (mean, se, residuals) =
                cascade_reference(q, len, cfg.trials, cfg.seed, cell_index)?;
            residual_total += residuals;
            let eff = mean / binary_entropy(q);
            doc.push_row(format!(
                "{},{len},{},{},{},{}",
                cell(Some(q)),
                cfg.trials,
                cell(Some(mean)),
                cell(Some(se)),
                cell(Some(eff))
            ));
            summary.push(format!(
                "qber {q:.3}  length {len:>8}  leak rate {mean:.4} +- {se:.4}  efficiency {eff:.3}"
            ));
            cell_index += 1;
        }
    }
    if residual_total > 0 {
        summary.push(format!(
            "{residual_total} trial(s) ended with residual errors; their disclosed parities still count"
        ));
    }
    summary.push(format!(
        "{cell_index} cells x {} trials in {:.1} s",
        cfg.trials,
        started.elapsed().as_secs_f64()
    ));
    Ok(RunOutput { doc, summary })
}

pub(crate) fn leakage_curve(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let lc = cfg.leakage_curve.as_ref().expect("dispatch checked the kind");
    let qbers = sorted_f64(&lc.qbers);
    let grid = GridSpec::new(lc.de_grid)?;
    let members: Vec<PoolMember> = if lc.ensembles.is_empty() {
        default_pool_distributions()
            .into_iter()
            .map(|(rate, dist)| PoolMember { rate, dist })
            .collect()
    } else {
        lc.ensembles
            .iter()
            .map(|(_, dist)| PoolMember {
                rate: dist.design_rate(),
                dist: dist.clone(),
            })
            .collect()
    };

    let curve = asymptotic_leakage_curve(&members, lc.d_over_n, &qbers, &grid)?;
    let de_elapsed = started.elapsed().as_secs_f64();

    let mut doc = CsvDocument::new(
        cfg,
        "qber,slepian_wolf,sp_leak_rate,sp_code_rate,sp_s_fraction,cascade_leak_rate,cascade_std_error",
    );
    let mut summary = Vec::new();
    let mut unachievable = 0;
    for (i, point) in curve.iter().enumerate() {
        let (casc_mean, casc_se, _) =
            cascade_reference(point.qber, lc.cascade_length, cfg.trials, cfg.seed, i as u64)?;
        let sw = binary_entropy(point.qber);
        let (sp_leak, sp_rate, sp_sigma) = match &point.choice {
            Some(c) => (Some(c.leak_rate), Some(c.code_rate), Some(c.s_fraction)),
            None => {
                unachievable += 1;
                (None, None, None)
            }
        };
        doc.push_row(format!(
            "{},{},{},{},{},{},{}",
            cell(Some(point.qber)),
            cell(Some(sw)),
            cell(sp_leak),
            cell(sp_rate),
            cell(sp_sigma),
            cell(Some(casc_mean)),
            cell(Some(casc_se))
        ));
        summary.push(format!(
            "qber {:.3}  limit {sw:.4}  sp {}  cascade {casc_mean:.4}",
            point.qber,
            sp_leak.map_or("unachievable".into(), |l| format!("{l:.4}")),
        ));
    }
    if unachievable > 0 {
        summary.push(format!(
            "{unachievable} sweep point(s) above every pool threshold; left blank"
        ));
    }
    summary.push(format!(
        "density evolution {de_elapsed:.1} s, total {:.1} s",
        started.elapsed().as_secs_f64()
    ));
    Ok(RunOutput { doc, summary })
}

/// Asymptotic leakage of the rate-adapted protocol from the frozen pool
/// thresholds, as interpolation knots for [`LeakModel::RateCurve`].
fn sp_rate_points() -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    let mut q = 0.0;
    while let Some(plan) = plan_modulation(q, 0.0) {
        points.push((q, plan.leak_rate));
        q += 0.0025;
    }
    points
}

/// Cascade leakage rates measured at `length`, as interpolation knots.
fn cascade_rate_points(
    length: usize,
    trials: usize,
    master: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut grid = vec![0.001, 0.005];
    for i in 1..=12 {
        grid.push(i as f64 * 0.01);
    }
    let mut points = Vec::with_capacity(grid.len());
    for (i, &q) in grid.iter().enumerate() {
        // Cell indices share the master stream with the sweep cells; the
        // high offset keeps the two families disjoint.
        let (mean, _, _) = cascade_reference(q, length, trials, master, 1_000_000 + i as u64)?;
        points.push((q, mean));
    }
    Ok(points)
}

pub(crate) fn finite_key_curve(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let fc = cfg
        .finite_key_curve
        .as_ref()
        .expect("dispatch checked the kind");
    let qbers = sorted_f64(&fc.qbers);
    let budget = FiniteKeyBudget::split_evenly(fc.eps_total, fc.eps_ec)?;

    // Geometric grid of signal counts, deduplicated after rounding.
    let ratio = (fc.n_end as f64 / fc.n_start as f64).powf(1.0 / (fc.n_points - 1) as f64);
    let mut n_grid: Vec<u64> = (0..fc.n_points)
        .map(|i| (fc.n_start as f64 * ratio.powi(i as i32)).round() as u64)
        .collect();
    n_grid.dedup();

    let mut models: Vec<(ProtocolTag, LeakModel)> = Vec::new();
    for proto in [ProtocolTag::Perfect, ProtocolTag::Sp, ProtocolTag::Cascade] {
        if !fc.protocols.contains(&proto) {
            continue;
        }
        let model = match proto {
            ProtocolTag::Perfect => LeakModel::Perfect,
            ProtocolTag::Sp => LeakModel::RateCurve {
                points: sp_rate_points(),
                finite_size_coeff: fc.sp_finite_coeff,
            },
            ProtocolTag::Cascade => LeakModel::RateCurve {
                points: cascade_rate_points(fc.cascade_length, cfg.trials, cfg.seed)?,
                finite_size_coeff: 0.0,
            },
        };
        models.push((proto, model));
    }

    let mut doc = CsvDocument::new(
        cfg,
        "qber,protocol,n_signals,m,t,q_bound,leak_bits,delta,rate,achievable",
    );
    let mut summary = Vec::new();
    for &q in &qbers {
        for (proto, model) in &models {
            let mut first_positive: Option<u64> = None;
            let mut last_rate = 0.0;
            for &n in &n_grid {
                let report = optimize_plan(n, q, &budget, model)?;
                if report.achievable && report.rate > 0.0 && first_positive.is_none() {
                    first_positive = Some(n);
                }
                last_rate = report.rate;
                doc.push_row(format!(
                    "{},{},{n},{},{},{},{},{},{},{}",
                    cell(Some(q)),
                    proto.as_str(),
                    report.plan.m(),
                    report.plan.t(),
                    cell(Some(report.q_bound)),
                    cell_sci(report.leak_bits),
                    cell(Some(report.delta)),
                    cell(Some(report.rate)),
                    u8::from(report.achievable)
                ));
            }
            summary.push(format!(
                "qber {q:.3}  {:<8} first positive rate at N = {}  rate({:.0e}) = {last_rate:.4}",
                proto.as_str(),
                first_positive.map_or("never".into(), |n| format!("{:.2e}", n as f64)),
                *n_grid.last().unwrap() as f64,
            ));
        }
    }
    summary.push(format!("total {:.1} s", started.elapsed().as_secs_f64()));
    Ok(RunOutput { doc, summary })
}

/// Mother code plus its threshold table for the reveal selector.
struct PreparedCode {
    code: Arc<SparseLinearCode>,
    table: ThresholdTable,
    rate_label: f64,
    live_table: bool,
}

/// Reveal counts matching the tabulated reveal fractions at length `n`.
fn reveal_counts(n: usize, d: usize) -> Vec<usize> {
    let mut s_values: Vec<usize> = POOL_SIGMA_GRID
        .iter()
        .map(|&sigma| ((sigma * n as f64).round() as usize).min(d))
        .collect();
    s_values.dedup();
    s_values
}

fn prepare_code(sr: &SingleRunConfig, master: u64) -> Result<PreparedCode> {
    let n = sr.n;
    let d = (sr.d_over_n * n as f64).round() as usize;
    if let Some((_, code)) = &sr.code {
        // A file-supplied code has no frozen table; measure its ensemble
        // thresholds directly.
        let (lambda_hist, rho_hist) = code.edge_degree_histograms();
        let to_pairs = |hist: &[f64]| -> Vec<(usize, f64)> {
            hist.iter()
                .enumerate()
                .filter(|&(_, &f)| f > 0.0)
                .map(|(deg, &f)| (deg, f))
                .collect()
        };
        let dist = DegreeDistribution::new(to_pairs(&lambda_hist), to_pairs(&rho_hist))?;
        let grid = GridSpec::new(512)?;
        let table = build_threshold_table(&dist, n, d, &reveal_counts(n, d), &grid, 5e-4)?;
        return Ok(PreparedCode {
            code: Arc::new(code.clone()),
            table,
            rate_label: code.rate(),
            live_table: true,
        });
    }
    let member = nearest_member(sr.rate);
    let pool_rate = member_rate(member).expect("nearest_member returns a valid index");
    if (pool_rate - sr.rate).abs() > 0.026 {
        return Err(Error::config(format!(
            "no built-in ensemble near rate {}; closest is {pool_rate}",
            sr.rate
        )));
    }
    let dist = default_pool_distributions()
        .swap_remove(member)
        .1;
    let code = construct(&dist, n, seed_stream(master, 0))?;
    let row = member_thresholds(member).expect("member index is in range");
    let entries: Vec<(usize, f64)> = reveal_counts(n, d)
        .into_iter()
        .map(|s| {
            let j = ((s as f64 / n as f64) / 0.01).round() as usize;
            (s, row[j.min(row.len() - 1)])
        })
        .collect();
    Ok(PreparedCode {
        code: Arc::new(code),
        table: ThresholdTable::new(entries)?,
        rate_label: pool_rate,
        live_table: false,
    })
}

/// One protocol execution's reportable facts.
struct TrialResult {
    qber_est: f64,
    s: usize,
    leak_bits: u64,
    success: bool,
    undetected: bool,
    iterations: Option<usize>,
    transcript_bytes: Option<usize>,
}

fn single_sp_trial(
    sr: &SingleRunConfig,
    prep: &PreparedCode,
    eps_ec: f64,
    ts: u64,
) -> Result<TrialResult> {
    let n = sr.n;
    let d = (sr.d_over_n * n as f64).round() as usize;
    let t = n - d;
    let pair = CorrelatedPair::generate(t + sr.est_sample, sr.qber, seed_stream(ts, 0))?;
    let (est, kept) = estimate_qber(&pair.x, &pair.y, sr.est_sample, seed_stream(ts, 1))?;
    let reduced = CorrelatedPair {
        x: kept.iter().map(|&i| pair.x[i]).collect(),
        y: kept.iter().map(|&i| pair.y[i]).collect(),
        crossover: pair.crossover,
    };

    let margin = qber_margin(est, sr.est_sample) + FINITE_MARGIN_COEFF / (n as f64).sqrt();
    let s = prep.table.choose_s(est, margin)?;
    let params = SpParams::new(prep.code.clone(), d, s, eps_ec, seed_stream(ts, 2))?;
    let p_dec = est.clamp(1e-4, 0.49);
    let (transcript, outcome) = sp_protocol::run(&reduced, p_dec, &params)?;

    let reconciled = outcome.status == SpStatus::Reconciled;
    let undetected = reconciled
        && outcome
            .alice_key
            .as_ref()
            .zip(outcome.bob_key.as_ref())
            .is_some_and(|(a, b)| a != b);
    Ok(TrialResult {
        qber_est: est,
        s,
        leak_bits: transcript.leakage_bits,
        success: reconciled && !undetected,
        undetected,
        iterations: Some(outcome.decoder_iterations),
        transcript_bytes: Some(transcript.to_bytes().len()),
    })
}

fn single_cascade_trial(sr: &SingleRunConfig, ts: u64) -> Result<TrialResult> {
    let pair = CorrelatedPair::generate(sr.n + sr.est_sample, sr.qber, seed_stream(ts, 0))?;
    let (est, kept) = estimate_qber(&pair.x, &pair.y, sr.est_sample, seed_stream(ts, 1))?;
    let x: Vec<u8> = kept.iter().map(|&i| pair.x[i]).collect();
    let y: Vec<u8> = kept.iter().map(|&i| pair.y[i]).collect();
    let params = CascadeParams::classic(seed_stream(ts, 2));
    let out = run_cascade(&x, &y, est.max(1e-3), &params)?;
    Ok(TrialResult {
        qber_est: est,
        s: 0,
        leak_bits: out.parities_disclosed as u64,
        success: out.residual_errors == 0,
        undetected: false,
        iterations: None,
        transcript_bytes: None,
    })
}

pub(crate) fn single_run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let sr = cfg.single_run.as_ref().expect("dispatch checked the kind");
    let is_sp = sr.protocol == ProtocolTag::Sp;
    let d = if is_sp {
        (sr.d_over_n * sr.n as f64).round() as usize
    } else {
        0
    };
    let t = sr.n - d;
    let eps_ec = 1e-10;

    let prep = if is_sp {
        Some(prepare_code(sr, cfg.seed)?)
    } else {
        None
    };
    let build_elapsed = started.elapsed().as_secs_f64();

    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let ts = trial_seed(cfg.seed, 1, i as u64);
            match &prep {
                Some(prep) => single_sp_trial(sr, prep, eps_ec, ts),
                None => single_cascade_trial(sr, ts),
            }
        })
        .collect::<Result<Vec<TrialResult>>>()?;

    let mut doc = CsvDocument::new(
        cfg,
        "trial,protocol,n,t,d,s,qber_true,qber_est,leak_bits,leak_rate,efficiency,success,iterations",
    );
    let h_true = binary_entropy(sr.qber);
    let mut leak_rates = Vec::new();
    let mut successes = 0;
    let mut undetected = 0;
    for (i, r) in results.iter().enumerate() {
        let leak_rate = r.leak_bits as f64 / t as f64;
        if r.success {
            successes += 1;
            leak_rates.push(leak_rate);
        }
        undetected += usize::from(r.undetected);
        let eff = (h_true > 0.0).then(|| leak_rate / h_true);
        doc.push_row(format!(
            "{i},{},{},{t},{d},{},{},{},{},{},{},{},{}",
            sr.protocol.as_str(),
            sr.n,
            r.s,
            cell(Some(sr.qber)),
            cell(Some(r.qber_est)),
            r.leak_bits,
            cell(Some(leak_rate)),
            cell(eff),
            u8::from(r.success),
            r.iterations.map_or("na".into(), |it| it.to_string())
        ));
    }

    let mut summary = Vec::new();
    if let Some(prep) = &prep {
        summary.push(format!(
            "mother code rate {:.2}, n = {}, extension d = {d}, payload t = {t}{}",
            prep.rate_label,
            sr.n,
            if prep.live_table {
                " (thresholds measured live from the supplied code)"
            } else {
                ""
            }
        ));
        if let Some(r) = results.first() {
            let margin = qber_margin(r.qber_est, sr.est_sample)
                + FINITE_MARGIN_COEFF / (sr.n as f64).sqrt();
            summary.push(format!(
                "first trial: estimate {:.4} (sample {}), margin {margin:.4}, reveal s = {}",
                r.qber_est, sr.est_sample, r.s
            ));
            if let Some(bytes) = r.transcript_bytes {
                summary.push(format!(
                    "first trial transcript: {} leaked bits ({bytes} bytes serialized)",
                    r.leak_bits
                ));
            }
        }
    } else {
        summary.push(format!("string length {} plus {} estimation bits", sr.n, sr.est_sample));
    }
    let (mean_leak, _) = mean_stderr(&leak_rates);
    let eff_note = if h_true > 0.0 && !leak_rates.is_empty() {
        format!(", efficiency {:.3}", mean_leak / h_true)
    } else {
        String::new()
    };
    summary.push(format!(
        "{successes}/{} trial(s) reconciled; mean leak rate over successes {mean_leak:.4}{eff_note}",
        cfg.trials
    ));
    if undetected > 0 {
        summary.push(format!(
            "{undetected} reconciled trial(s) carried an undetected mismatch"
        ));
    }
    summary.push(format!(
        "setup {build_elapsed:.1} s, total {:.1} s",
        started.elapsed().as_secs_f64()
    ));
    Ok(RunOutput { doc, summary })
}
