//! Progressive-edge-growth construction of Tanner graphs.
//!
//! Edges are placed one symbol at a time. Each new edge prefers a check
//! outside the symbol's current BFS ball (maximizing the shortest cycle the
//! edge can close), tie-breaking by lowest current check degree; among
//! equal-degree candidates the choice is seeded-random. Check degrees are
//! capped by a target sequence drawn from the check-side distribution, so
//! the realized graph matches both sides of the ensemble within rounding;
//! a capped check may be exceeded by one edge when every in-capacity
//! placement would close a 4-cycle.
//!
//! The BFS lookahead is depth-limited (2, extended to 4 on demand). A full
//! ball search is quadratic in the edge count and unusable at n = 2e5;
//! within the cap the no-4-cycle guarantee is identical, only cycles longer
//! than 8 are left to chance.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DegreeDistribution, SparseLinearCode};
use crate::error::{Error, Result};

const NEAR_DEPTH: usize = 2;
const FAR_DEPTH: usize = 4;

pub(crate) struct PegState {
    chk_target: Vec<u32>,
    chk_deg: Vec<u32>,
    chk_adj: Vec<Vec<u32>>,
    sym_adj: Vec<Vec<u32>>,
    /// Checks bucketed by current degree, lazily pruned.
    buckets: Vec<BTreeSet<u32>>,
    chk_stamp: Vec<u32>,
    sym_stamp: Vec<u32>,
    epoch: u32,
    /// BFS levels of check nodes, reused across edges.
    levels: Vec<Vec<u32>>,
    rng: ChaCha8Rng,
}

/// Builds a parity-check matrix realizing `dist` at block length `n`.
///
/// Deterministic in `(dist, n, seed)`; the seed only shuffles the
/// assignment of target degrees to check indices.
///
/// # Errors
///
/// Propagates unrealizable degree sequences from
/// [`DegreeDistribution::node_degree_sequences`].
pub fn construct(dist: &DegreeDistribution, n: usize, seed: u64) -> Result<SparseLinearCode> {
    let (sym_degs, mut chk_target) = dist.node_degree_sequences(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    chk_target.shuffle(&mut rng);

    let m = chk_target.len();
    let max_target = chk_target.iter().copied().max().unwrap_or(0);
    let mut st = PegState {
        chk_target: chk_target.iter().map(|&d| d as u32).collect(),
        chk_deg: vec![0; m],
        chk_adj: chk_target.iter().map(|&d| Vec::with_capacity(d)).collect(),
        sym_adj: sym_degs.iter().map(|&d| Vec::with_capacity(d)).collect(),
        buckets: vec![BTreeSet::new(); max_target + 1],
        chk_stamp: vec![0; m],
        sym_stamp: vec![0; n],
        epoch: 0,
        levels: Vec::new(),
        rng,
    };
    st.buckets[0].extend(0..m as u32);

    for s in 0..n {
        for edge in 0..sym_degs[s] {
            let c = if edge == 0 {
                st.pick_unconstrained()
            } else {
                st.pick_outside_ball(s)
            }
            .ok_or_else(|| Error::runtime(format!("no check with capacity left at symbol {s}")))?;
            st.connect(s as u32, c);
        }
    }

    let rows = st.chk_adj.into_iter().collect();
    SparseLinearCode::new(n, rows)
}

impl PegState {
    fn connect(&mut self, s: u32, c: u32) {
        self.chk_adj[c as usize].push(s);
        self.sym_adj[s as usize].push(c);
        let d = self.chk_deg[c as usize] + 1;
        self.chk_deg[c as usize] = d;
        if (d as usize) < self.buckets.len() {
            self.buckets[d as usize].insert(c);
        }
        // The stale entry in bucket d-1 is pruned lazily during scans.
    }

    fn has_capacity(&self, c: u32) -> bool {
        self.chk_deg[c as usize] < self.chk_target[c as usize]
    }

    /// First edge of a symbol: any lowest-degree check. The epoch bump
    /// invalidates stamps left by the previous ball search.
    fn pick_unconstrained(&mut self) -> Option<u32> {
        self.epoch += 1;
        self.pick_min_degree()
    }

    /// Lowest-degree check with spare capacity, skipping checks stamped in
    /// the current epoch. Ties are broken by scanning each bucket from a
    /// seeded-random rotation point, so equal-degree candidates are chosen
    /// in varied order across seeds.
    fn pick_min_degree(&mut self) -> Option<u32> {
        // Rotation point must live inside the index range or the wraparound
        // scan degenerates to ascending order and the graph turns periodic.
        let start = self.rng.gen_range(0..self.chk_deg.len() as u32);
        for d in 0..self.buckets.len() {
            let mut stale: Vec<u32> = Vec::new();
            let mut found = None;
            let bucket = &self.buckets[d];
            for &c in bucket.range(start..).chain(bucket.range(..start)) {
                if self.chk_deg[c as usize] as usize != d || !self.has_capacity(c) {
                    stale.push(c);
                    continue;
                }
                if self.chk_stamp[c as usize] == self.epoch {
                    continue;
                }
                found = Some(c);
                break;
            }
            for c in stale {
                self.buckets[d].remove(&c);
            }
            if found.is_some() {
                return found;
            }
        }
        None
    }

    /// Preferred PEG choice for a non-first edge of symbol `s`: a check
    /// with capacity outside the BFS ball, else at depth >= 2 in the ball,
    /// else a full check outside the ball (overflowing its target by one
    /// beats closing a 4-cycle), else the shallow in-ball remainder.
    fn pick_outside_ball(&mut self, s: usize) -> Option<u32> {
        self.epoch += 1;
        self.grow_ball(s, 0, NEAR_DEPTH);
        if let Some(c) = self.pick_min_degree() {
            return Some(c);
        }
        self.grow_ball(s, NEAR_DEPTH, FAR_DEPTH);
        if let Some(c) = self.pick_min_degree() {
            return Some(c);
        }
        if let Some(c) = self.pick_in_ball(s, 2, true) {
            return Some(c);
        }
        if let Some(c) = self.pick_overflow() {
            return Some(c);
        }
        if let Some(c) = self.pick_in_ball(s, 2, false) {
            return Some(c);
        }
        if let Some(c) = self.pick_in_ball(s, 1, true) {
            return Some(c);
        }
        self.pick_in_ball(s, 1, false)
    }

    /// Best in-ball candidate at depth >= `min_depth`, deepest level first,
    /// lowest current degree within a level (seeded tie-break).
    fn pick_in_ball(&mut self, s: usize, min_depth: usize, respect_capacity: bool) -> Option<u32> {
        for depth in (min_depth..self.levels.len()).rev() {
            let mut ties: Vec<u32> = Vec::new();
            let mut best_deg = u32::MAX;
            for &c in &self.levels[depth] {
                if (respect_capacity && !self.has_capacity(c)) || self.sym_adj[s].contains(&c) {
                    continue;
                }
                let deg = self.chk_deg[c as usize];
                if deg < best_deg {
                    best_deg = deg;
                    ties.clear();
                }
                if deg == best_deg {
                    ties.push(c);
                }
            }
            if !ties.is_empty() {
                return Some(ties[self.rng.gen_range(0..ties.len())]);
            }
        }
        None
    }

    /// Unstamped check closest to its target degree, ignoring capacity.
    /// Rare corner: only reached when all spare capacity sits at depth < 2.
    fn pick_overflow(&mut self) -> Option<u32> {
        let mut ties: Vec<u32> = Vec::new();
        let mut best_deg = u32::MAX;
        for c in 0..self.chk_deg.len() as u32 {
            if self.chk_stamp[c as usize] == self.epoch {
                continue;
            }
            let deg = self.chk_deg[c as usize];
            if deg < best_deg {
                best_deg = deg;
                ties.clear();
            }
            if deg == best_deg {
                ties.push(c);
            }
        }
        if ties.is_empty() {
            None
        } else {
            Some(ties[self.rng.gen_range(0..ties.len())])
        }
    }

    /// Expands the stamped BFS ball of `s` from depth `from` to `to`.
    /// Level 0 holds the checks already adjacent to `s`.
    fn grow_ball(&mut self, s: usize, from: usize, to: usize) {
        let epoch = self.epoch;
        if from == 0 {
            self.levels.clear();
            self.sym_stamp[s] = epoch;
            let mut level0 = Vec::new();
            for &c in &self.sym_adj[s] {
                self.chk_stamp[c as usize] = epoch;
                level0.push(c);
            }
            self.levels.push(level0);
        }
        for depth in from..to {
            if depth >= self.levels.len() {
                break;
            }
            let mut next = Vec::new();
            for i in 0..self.levels[depth].len() {
                let c = self.levels[depth][i];
                for vi in 0..self.chk_adj[c as usize].len() {
                    let v = self.chk_adj[c as usize][vi] as usize;
                    if self.sym_stamp[v] == epoch {
                        continue;
                    }
                    self.sym_stamp[v] = epoch;
                    for ci in 0..self.sym_adj[v].len() {
                        let c2 = self.sym_adj[v][ci];
                        if self.chk_stamp[c2 as usize] != epoch {
                            self.chk_stamp[c2 as usize] = epoch;
                            next.push(c2);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            self.levels.push(next);
        }
    }
}
