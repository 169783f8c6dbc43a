//! Mother-code pool: one code per rate, all sharing a block length.
//!
//! Rate modulation by puncturing and shortening moves the adapted rate by
//! at most d/n around each member, so member rates spaced 0.05 apart give
//! contiguous coverage at the default d/n = 5%.

use super::{construct, DegreeDistribution, SparseLinearCode};
use crate::error::{Error, Result};

/// Ordered collection of parity-check codes with a common block length and
/// strictly increasing rates.
#[derive(Debug, Clone)]
pub struct CodePool {
    codes: Vec<SparseLinearCode>,
}

impl CodePool {
    /// Validates shared length and strictly increasing nominal rates.
    pub fn new(codes: Vec<SparseLinearCode>) -> Result<Self> {
        let Some(first) = codes.first() else {
            return Err(Error::config("code pool must not be empty"));
        };
        let n = first.n();
        for code in &codes {
            if code.n() != n {
                return Err(Error::config(format!(
                    "pool members must share block length: {} vs {n}",
                    code.n()
                )));
            }
        }
        for pair in codes.windows(2) {
            if pair[1].rate() <= pair[0].rate() {
                return Err(Error::config(format!(
                    "pool rates must be strictly increasing: {} after {}",
                    pair[1].rate(),
                    pair[0].rate()
                )));
            }
        }
        Ok(Self { codes })
    }

    pub fn n(&self) -> usize {
        self.codes[0].n()
    }

    pub fn members(&self) -> &[SparseLinearCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// Symbol-side edge fractions per pool rate. Chosen by threshold search
/// with the density-evolution engine in this crate; check side is the
/// matching concentrated distribution from
/// [`DegreeDistribution::with_target_rate`].
const LAMBDA_TABLE: &[(f64, &[(usize, f64)])] = &[
    (0.40, &[(2, 0.28), (3, 0.26), (8, 0.46)]),
    (0.45, &[(2, 0.27), (3, 0.26), (8, 0.47)]),
    (0.50, &[(2, 0.26), (3, 0.25), (8, 0.49)]),
    (0.55, &[(2, 0.26), (3, 0.25), (8, 0.49)]),
    (0.60, &[(2, 0.25), (3, 0.25), (8, 0.50)]),
    (0.65, &[(2, 0.24), (3, 0.25), (8, 0.51)]),
    (0.70, &[(2, 0.23), (3, 0.25), (8, 0.52)]),
    (0.75, &[(2, 0.22), (3, 0.26), (8, 0.52)]),
    (0.80, &[(2, 0.21), (3, 0.26), (8, 0.53)]),
    (0.85, &[(2, 0.20), (3, 0.27), (8, 0.53)]),
    (0.90, &[(2, 0.19), (3, 0.28), (8, 0.53)]),
];

/// Default pool ensembles as (design rate, distribution), rate ascending.
pub fn default_pool_distributions() -> Vec<(f64, DegreeDistribution)> {
    LAMBDA_TABLE
        .iter()
        .map(|&(rate, lambda)| {
            let dist = DegreeDistribution::with_target_rate(lambda.to_vec(), rate)
                .expect("built-in distribution tables are valid");
            (rate, dist)
        })
        .collect()
}

/// Constructs every default ensemble at block length `n`. Member i uses
/// seed + i so graphs are independent but reproducible.
pub fn default_pool(n: usize, seed: u64) -> Result<CodePool> {
    let codes = default_pool_distributions()
        .into_iter()
        .enumerate()
        .map(|(i, (_, dist))| construct(&dist, n, seed + i as u64))
        .collect::<Result<Vec<_>>>()?;
    CodePool::new(codes)
}

/// Extension fraction d/n that the frozen threshold table assumes.
pub const POOL_D_OVER_N: f64 = 0.05;

/// Reveal fractions s/n at which member thresholds are tabulated.
pub const POOL_SIGMA_GRID: [f64; 6] = [0.0, 0.01, 0.02, 0.03, 0.04, 0.05];

/// Decoding threshold of each default ensemble at the grid reveal
/// fractions, extension fraction [`POOL_D_OVER_N`], row order matching
/// [`default_pool_distributions`]. Measured with the density-evolution
/// engine in this crate; each row rises with the reveal fraction.
const THRESHOLD_TABLE: &[[f64; 6]] = &[
    [0.1258, 0.1290, 0.1322, 0.1354, 0.1386, 0.1418],
    [0.1086, 0.1118, 0.1150, 0.1182, 0.1214, 0.1246],
    [0.0925, 0.0957, 0.0989, 0.1021, 0.1053, 0.1085],
    [0.0777, 0.0809, 0.0841, 0.0873, 0.0905, 0.0937],
    [0.0637, 0.0669, 0.0701, 0.0733, 0.0765, 0.0797],
    [0.0510, 0.0542, 0.0574, 0.0606, 0.0638, 0.0670],
    [0.0393, 0.0425, 0.0457, 0.0489, 0.0521, 0.0553],
    [0.0292, 0.0324, 0.0356, 0.0388, 0.0420, 0.0452],
    [0.0200, 0.0232, 0.0264, 0.0296, 0.0328, 0.0360],
    [0.0120, 0.0152, 0.0184, 0.0216, 0.0248, 0.0280],
    [0.0050, 0.0082, 0.0114, 0.0146, 0.0178, 0.0210],
];

/// Number of default pool members.
pub fn pool_size() -> usize {
    LAMBDA_TABLE.len()
}

/// Design rate of default member `index`.
pub fn member_rate(index: usize) -> Option<f64> {
    LAMBDA_TABLE.get(index).map(|&(rate, _)| rate)
}

/// Index of the default member whose design rate is nearest `rate`.
pub fn nearest_member(rate: f64) -> usize {
    let mut best = 0;
    for (i, &(r, _)) in LAMBDA_TABLE.iter().enumerate() {
        if (r - rate).abs() < (LAMBDA_TABLE[best].0 - rate).abs() {
            best = i;
        }
    }
    best
}

/// Frozen thresholds of member `index` along [`POOL_SIGMA_GRID`].
pub fn member_thresholds(index: usize) -> Option<&'static [f64; 6]> {
    THRESHOLD_TABLE.get(index)
}

/// Threshold of member `index` at reveal fraction `sigma`, linearly
/// interpolated between grid entries; `None` outside the table.
pub fn member_threshold_at(index: usize, sigma: f64) -> Option<f64> {
    let row = THRESHOLD_TABLE.get(index)?;
    let d = POOL_D_OVER_N;
    if !(0.0..=d).contains(&sigma) {
        return None;
    }
    let step = d / (row.len() - 1) as f64;
    let j = ((sigma / step) as usize).min(row.len() - 2);
    let frac = (sigma - j as f64 * step) / step;
    Some(row[j] + frac * (row[j + 1] - row[j]))
}

/// A rate-modulation choice: which member to use and how much of the
/// extension to reveal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationPlan {
    pub member: usize,
    pub rate: f64,
    /// Reveal fraction s/n.
    pub sigma: f64,
    /// Syndrome plus reveal cost per net key bit.
    pub leak_rate: f64,
}

/// Cheapest modulation choice whose frozen threshold clears
/// `crossover + margin`; `None` when no member covers it.
///
/// Leakage per net key bit is `((1 - R) - d/n + sigma) / (1 - d/n)`, so
/// candidates trade code rate against reveal fraction; all members are
/// scanned and the minimum kept.
pub fn plan_modulation(crossover: f64, margin: f64) -> Option<ModulationPlan> {
    let d = POOL_D_OVER_N;
    let target = crossover + margin;
    let mut best: Option<ModulationPlan> = None;
    for (i, &(rate, _)) in LAMBDA_TABLE.iter().enumerate() {
        let row = &THRESHOLD_TABLE[i];
        let step = d / (row.len() - 1) as f64;
        if row[row.len() - 1] <= target {
            continue;
        }
        // First grid segment whose upper end clears the target, then the
        // exact crossing inside it by inverting the interpolation.
        let sigma = if row[0] > target {
            0.0
        } else {
            let j = (0..row.len() - 1)
                .find(|&j| row[j] <= target && row[j + 1] > target)
                .expect("rows rise with sigma, so a crossing segment exists");
            (j as f64 + (target - row[j]) / (row[j + 1] - row[j])) * step
        };
        let leak_rate = ((1.0 - rate) - d + sigma) / (1.0 - d);
        if best.is_none_or(|b| leak_rate < b.leak_rate) {
            best = Some(ModulationPlan {
                member: i,
                rate,
                sigma,
                leak_rate,
            });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_distributions_hit_their_rates() {
        for (rate, dist) in default_pool_distributions() {
            assert!(
                (dist.design_rate() - rate).abs() < 1e-3,
                "rate {rate}: design {}",
                dist.design_rate()
            );
        }
    }

    #[test]
    fn default_pool_orders_rates() {
        let pool = default_pool(2000, 42).unwrap();
        assert_eq!(pool.len(), 11);
        assert_eq!(pool.n(), 2000);
        for (code, (rate, _)) in pool.members().iter().zip(default_pool_distributions()) {
            assert!(
                (code.rate() - rate).abs() < 0.01,
                "nominal {} vs design {rate}",
                code.rate()
            );
        }
    }

    #[test]
    fn mismatched_length_rejected() {
        let dist = DegreeDistribution::regular(3, 6).unwrap();
        let a = construct(&dist, 120, 1).unwrap();
        let b = construct(&dist, 240, 1).unwrap();
        assert!(CodePool::new(vec![a, b]).is_err());
    }

    #[test]
    fn threshold_rows_rise_with_sigma() {
        // plan_modulation's crossing search relies on this.
        for i in 0..pool_size() {
            let row = member_thresholds(i).unwrap();
            assert!(
                row.windows(2).all(|w| w[1] > w[0]),
                "member {i} thresholds {row:?} must rise with the reveal fraction"
            );
        }
        // Lower rate decodes more noise at every reveal fraction.
        for i in 1..pool_size() {
            let (a, b) = (member_thresholds(i - 1).unwrap(), member_thresholds(i).unwrap());
            assert!(a.iter().zip(b).all(|(x, y)| x > y));
        }
    }

    #[test]
    fn threshold_interpolation_hits_grid_points() {
        let row = member_thresholds(0).unwrap();
        for (j, &sigma) in POOL_SIGMA_GRID.iter().enumerate() {
            let th = member_threshold_at(0, sigma).unwrap();
            assert!((th - row[j]).abs() < 1e-12);
        }
        let mid = member_threshold_at(0, 0.005).unwrap();
        assert!((mid - 0.5 * (row[0] + row[1])).abs() < 1e-12);
        assert!(member_threshold_at(0, 0.06).is_none());
        assert!(member_threshold_at(99, 0.0).is_none());
    }

    #[test]
    fn modulation_plan_is_coherent() {
        // Tiny crossover: the top-rate member with nothing revealed.
        let easy = plan_modulation(1e-4, 0.0).unwrap();
        assert!((easy.rate - 0.90).abs() < 1e-12);
        assert_eq!(easy.sigma, 0.0);
        assert!((easy.leak_rate - 0.05 / 0.95).abs() < 1e-12);
        // The chosen threshold really clears the target.
        let plan = plan_modulation(0.05, 0.002).unwrap();
        let th = member_threshold_at(plan.member, plan.sigma).unwrap();
        assert!(th >= 0.052 - 1e-9);
        // Leakage responds monotonically to the crossover.
        let mut last = 0.0;
        let mut q = 0.005;
        while let Some(p) = plan_modulation(q, 0.0) {
            assert!(p.leak_rate >= last - 1e-12, "leak fell at crossover {q}");
            last = p.leak_rate;
            q += 0.005;
        }
        assert!(q > 0.10, "pool should cover crossovers past 0.10, stopped at {q}");
        assert!(plan_modulation(0.45, 0.0).is_none());
    }

    #[test]
    fn non_increasing_rate_rejected() {
        let dist = DegreeDistribution::regular(3, 6).unwrap();
        let a = construct(&dist, 120, 1).unwrap();
        let b = construct(&dist, 120, 2).unwrap();
        assert!(CodePool::new(vec![a, b]).is_err());
        assert!(CodePool::new(vec![]).is_err());
    }
}
