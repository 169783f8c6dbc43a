//! Asymptotic leakage of the rate-adapted protocol, computed from
//! ensemble thresholds.
//!
//! A mother code of design rate `r` carries an extension fraction
//! `d/n`; revealing a fraction `sigma = s/n` of it and puncturing the
//! rest yields effective rate `(r - sigma) * n / (n - d)` and leakage
//! fraction `(1 - r - d/n + sigma) / (1 - d/n)` per net key bit. For
//! each target error rate the curve picks the pool member and reveal
//! fraction minimizing that leakage subject to the evolved density
//! converging.

use super::{converges, threshold, EnsembleSpec, GridSpec};
use crate::error::{Error, Result};
use crate::linear_code::DegreeDistribution;
use crate::sp_protocol::ThresholdTable;

/// One ensemble available to the rate selector.
#[derive(Debug, Clone)]
pub struct PoolMember {
    pub rate: f64,
    pub dist: DegreeDistribution,
}

/// Outcome at one grid point of the leakage sweep. `choice` is `None`
/// when no pool member converges at any reveal fraction.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub qber: f64,
    pub choice: Option<CurveChoice>,
}

#[derive(Debug, Clone)]
pub struct CurveChoice {
    pub leak_rate: f64,
    pub code_rate: f64,
    pub s_fraction: f64,
}

fn leak_rate(rate: f64, d_over_n: f64, sigma: f64) -> f64 {
    ((1.0 - rate) - d_over_n + sigma) / (1.0 - d_over_n)
}

/// Smallest reveal fraction in [0, d/n] at which the member decodes
/// crossover `qber`, to within `sigma_tol`; `None` if even full reveal
/// fails.
fn minimal_reveal(
    member: &PoolMember,
    d_over_n: f64,
    qber: f64,
    grid: &GridSpec,
    sigma_tol: f64,
) -> Result<Option<f64>> {
    let spec_at = |sigma: f64| EnsembleSpec::new(member.dist.clone(), d_over_n - sigma, sigma);
    if converges(&spec_at(0.0)?, qber, grid)? {
        return Ok(Some(0.0));
    }
    if !converges(&spec_at(d_over_n)?, qber, grid)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, d_over_n);
    while hi - lo > sigma_tol {
        let mid = 0.5 * (lo + hi);
        if converges(&spec_at(mid)?, qber, grid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Sweeps `qber_grid` and reports, per point, the cheapest achievable
/// leakage over the pool. Pool members are tried from the highest rate
/// down and the scan stops once no lower-rate member could beat the
/// best found, so typically only two or three members are evolved per
/// point.
pub fn asymptotic_leakage_curve(
    pool: &[PoolMember],
    d_over_n: f64,
    qber_grid: &[f64],
    grid: &GridSpec,
) -> Result<Vec<CurvePoint>> {
    if pool.is_empty() {
        return Err(Error::config("pool of ensembles is empty"));
    }
    if !(0.0..1.0).contains(&d_over_n) {
        return Err(Error::config(format!(
            "extension fraction must lie in [0, 1), got {d_over_n}"
        )));
    }
    let mut members: Vec<&PoolMember> = pool.iter().collect();
    members.sort_by(|a, b| b.rate.total_cmp(&a.rate));
    let sigma_tol = (d_over_n / 64.0).max(1e-4);

    let mut out = Vec::with_capacity(qber_grid.len());
    for &qber in qber_grid {
        let mut best: Option<CurveChoice> = None;
        for member in &members {
            // Leakage grows with sigma, so sigma = 0 bounds what this
            // and every lower-rate member can achieve.
            let floor = leak_rate(member.rate, d_over_n, 0.0);
            if let Some(b) = &best {
                if b.leak_rate <= floor {
                    break;
                }
            }
            if let Some(sigma) = minimal_reveal(member, d_over_n, qber, grid, sigma_tol)? {
                let leak = leak_rate(member.rate, d_over_n, sigma);
                if best.as_ref().is_none_or(|b| leak < b.leak_rate) {
                    best = Some(CurveChoice {
                        leak_rate: leak,
                        code_rate: member.rate,
                        s_fraction: sigma,
                    });
                }
            }
        }
        out.push(CurvePoint {
            qber,
            choice: best,
        });
    }
    Ok(out)
}

/// Decoding threshold of a mother-code ensemble at extension fraction
/// `d/n` with reveal fraction `s/n`.
pub fn reveal_threshold(
    dist: &DegreeDistribution,
    d_over_n: f64,
    s_over_n: f64,
    grid: &GridSpec,
    tol: f64,
) -> Result<f64> {
    if s_over_n > d_over_n {
        return Err(Error::config(format!(
            "reveal fraction {s_over_n} exceeds extension fraction {d_over_n}"
        )));
    }
    let spec = EnsembleSpec::new(dist.clone(), d_over_n - s_over_n, s_over_n)?;
    threshold(&spec, grid, tol)
}

/// Per-reveal-count thresholds for a concrete code length, packaged for
/// the protocol's rate selector.
pub fn build_threshold_table(
    dist: &DegreeDistribution,
    n: usize,
    d: usize,
    s_values: &[usize],
    grid: &GridSpec,
    tol: f64,
) -> Result<ThresholdTable> {
    if d >= n {
        return Err(Error::config(format!(
            "extension size {d} must be smaller than the block length {n}"
        )));
    }
    let mut entries = Vec::with_capacity(s_values.len());
    for &s in s_values {
        if s > d {
            return Err(Error::config(format!(
                "reveal count {s} exceeds extension size {d}"
            )));
        }
        let th = reveal_threshold(dist, d as f64 / n as f64, s as f64 / n as f64, grid, tol)?;
        entries.push((s, th));
    }
    ThresholdTable::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_six() -> DegreeDistribution {
        DegreeDistribution::new(vec![(3, 1.0)], vec![(6, 1.0)]).unwrap()
    }

    #[test]
    fn leak_rate_matches_hand_computation() {
        // rate 0.9, d/n = 0.05, sigma = 0: ((1-0.9) - 0.05)/0.95.
        let l = leak_rate(0.9, 0.05, 0.0);
        assert!((l - 0.05 / 0.95).abs() < 1e-12);
        // Full reveal costs exactly d/n extra.
        let l = leak_rate(0.5, 0.05, 0.05);
        assert!((l - 0.5 / 0.95).abs() < 1e-12);
    }

    #[test]
    fn minimal_reveal_monotone_in_qber() {
        let grid = GridSpec::new(512).unwrap();
        let member = PoolMember {
            rate: 0.5,
            dist: three_six(),
        };
        // Below the fully punctured threshold (~0.076) no reveal is
        // needed; 0.085 sits between that and the fully revealed
        // threshold (~0.091), so a strictly positive fraction appears.
        let low = minimal_reveal(&member, 0.05, 0.06, &grid, 1e-3).unwrap().unwrap();
        assert_eq!(low, 0.0);
        let high = minimal_reveal(&member, 0.05, 0.085, &grid, 1e-3)
            .unwrap()
            .expect("full reveal should rescue 0.085");
        assert!(high > 0.0);
        let hopeless = minimal_reveal(&member, 0.05, 0.2, &grid, 1e-3).unwrap();
        assert!(hopeless.is_none());
    }

    #[test]
    fn curve_marks_unachievable_points() {
        let grid = GridSpec::new(512).unwrap();
        let pool = vec![PoolMember {
            rate: 0.5,
            dist: three_six(),
        }];
        let pts = asymptotic_leakage_curve(&pool, 0.05, &[0.05, 0.3], &grid).unwrap();
        assert!(pts[0].choice.is_some());
        assert!(pts[1].choice.is_none());
        let c = pts[0].choice.as_ref().unwrap();
        assert!((c.code_rate - 0.5).abs() < 1e-12);
        assert_eq!(c.s_fraction, 0.0);
        assert!((c.leak_rate - leak_rate(0.5, 0.05, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn curve_rejects_bad_arguments() {
        let grid = GridSpec::new(512).unwrap();
        assert!(asymptotic_leakage_curve(&[], 0.05, &[0.05], &grid).is_err());
        let pool = vec![PoolMember {
            rate: 0.5,
            dist: three_six(),
        }];
        assert!(asymptotic_leakage_curve(&pool, 1.0, &[0.05], &grid).is_err());
    }

    #[test]
    fn threshold_table_builder_orders_entries() {
        let grid = GridSpec::new(256).unwrap();
        let table = build_threshold_table(&three_six(), 1000, 50, &[0, 25, 50], &grid, 2e-3).unwrap();
        let ths: Vec<f64> = (0..3).map(|i| table.entries()[i].1).collect();
        assert!(ths[0] < ths[1] && ths[1] < ths[2], "thresholds {ths:?} should rise with s");
        assert!(build_threshold_table(&three_six(), 1000, 50, &[60], &grid, 1e-3).is_err());
        assert!(build_threshold_table(&three_six(), 50, 50, &[0], &grid, 1e-3).is_err());
    }
}
