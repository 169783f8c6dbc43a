//! Sparse binary parity-check codes.
//!
//! A code is stored as its parity-check matrix in sparse row form. Only
//! syndromes are ever needed here (reconciliation sends syndromes, never
//! codewords), so there is no generator matrix and no encoder.
//!
//! Construction from degree distributions lives in [`peg`], file I/O in
//! [`alist`], and the shared mother-code pool in [`pool`].

mod alist;
mod degree;
mod peg;
mod pool;

pub use alist::{load_alist, save_alist};
pub use degree::{parse_ensemble_spec, write_ensemble_spec, DegreeDistribution};
pub use peg::construct;
pub use pool::{
    default_pool, default_pool_distributions, member_rate, member_threshold_at,
    member_thresholds, nearest_member, plan_modulation, pool_size, CodePool, ModulationPlan,
    POOL_D_OVER_N, POOL_SIGMA_GRID,
};

use crate::error::{Error, Result};

/// A binary linear code given by a sparse parity-check matrix.
///
/// Rows may be linearly dependent; `num_checks()` is what a transcript
/// actually carries, while [`SparseLinearCode::rank`] gives the exact rank
/// for small codes. The nominal dimension `k()` assumes independent rows,
/// which is conservative for leakage accounting (a dependent row means we
/// charge a bit that carried no new information).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseLinearCode {
    n: usize,
    checks: Vec<Vec<u32>>,
}

impl SparseLinearCode {
    /// Builds a code from parity-check rows given as column-index sets.
    ///
    /// # Errors
    ///
    /// Rejects empty rows, out-of-range indices, and duplicate indices
    /// within a row. Rows are sorted internally.
    pub fn new(n: usize, mut checks: Vec<Vec<u32>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("block length must be positive"));
        }
        if checks.is_empty() || checks.len() >= n {
            return Err(Error::config(format!(
                "check count {} must lie in 1..{n}",
                checks.len()
            )));
        }
        for (i, row) in checks.iter_mut().enumerate() {
            if row.is_empty() {
                return Err(Error::config(format!("check {i} is empty")));
            }
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::config(format!("check {i} repeats a column")));
            }
            if *row.last().unwrap() as usize >= n {
                return Err(Error::config(format!(
                    "check {i} references column {} outside 0..{n}",
                    row.last().unwrap()
                )));
            }
        }
        Ok(SparseLinearCode { n, checks })
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity-check rows; equals the syndrome length in bits.
    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    /// Nominal dimension `n - num_checks()`.
    pub fn k(&self) -> usize {
        self.n - self.checks.len()
    }

    /// Nominal coding rate `k/n`.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// Parity-check rows as sorted column-index slices.
    pub fn checks(&self) -> impl Iterator<Item = &[u32]> {
        self.checks.iter().map(|r| r.as_slice())
    }

    /// Total number of edges in the Tanner graph.
    pub fn edge_count(&self) -> usize {
        self.checks.iter().map(|r| r.len()).sum()
    }

    /// Computes the syndrome `H·x` over GF(2).
    ///
    /// # Errors
    ///
    /// Fails when `x` is not `n` bits long.
    ///
    /// # Example
    ///
    /// ```
    /// let code = sprec::linear_code::SparseLinearCode::new(3, vec![vec![0, 1, 2]]).unwrap();
    /// assert_eq!(code.syndrome(&[1, 1, 0]).unwrap(), vec![0]);
    /// ```
    pub fn syndrome(&self, x: &[u8]) -> Result<Vec<u8>> {
        if x.len() != self.n {
            return Err(Error::config(format!(
                "word length {} does not match block length {}",
                x.len(),
                self.n
            )));
        }
        Ok(self
            .checks
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ x[c as usize]))
            .collect())
    }

    /// Exact GF(2) rank of the parity-check matrix.
    ///
    /// Dense elimination over 64-bit words: fine at desk scale, quadratic in
    /// the row count, so not meant for experiment-scale codes in hot paths.
    pub fn rank(&self) -> usize {
        let words = self.n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = self
            .checks
            .iter()
            .map(|row| {
                let mut bits = vec![0u64; words];
                for &c in row {
                    bits[c as usize / 64] |= 1u64 << (c as usize % 64);
                }
                bits
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.n {
            let (w, b) = (col / 64, col % 64);
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] >> b & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pivot);
            let (pivot_row, rest) = {
                let (head, tail) = rows.split_at_mut(rank + 1);
                (head[rank].clone(), tail)
            };
            for row in rest.iter_mut() {
                if row[w] >> b & 1 == 1 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    /// Per-degree fractions of Tanner-graph edges, `(symbol side, check side)`.
    ///
    /// Index `d` holds the fraction of edges incident to degree-`d` nodes.
    pub fn edge_degree_histograms(&self) -> (Vec<f64>, Vec<f64>) {
        let mut sym_deg = vec![0usize; self.n];
        for row in &self.checks {
            for &c in row {
                sym_deg[c as usize] += 1;
            }
        }
        let edges = self.edge_count() as f64;
        let mut sym_hist = Vec::new();
        for &d in &sym_deg {
            if d >= sym_hist.len() {
                sym_hist.resize(d + 1, 0.0);
            }
            sym_hist[d] += d as f64 / edges;
        }
        let mut chk_hist = Vec::new();
        for row in &self.checks {
            let d = row.len();
            if d >= chk_hist.len() {
                chk_hist.resize(d + 1, 0.0);
            }
            chk_hist[d] += d as f64 / edges;
        }
        (sym_hist, chk_hist)
    }
}
