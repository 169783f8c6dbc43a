//! Density evolution for irregular LDPC ensembles over the binary
//! symmetric channel, extended with punctured and pre-known symbol
//! fractions.
//!
//! Message densities live on a uniform LLR grid over [-LLR_MAX, LLR_MAX]
//! with an exact center point at 0 and explicit atoms at +-infinity.
//! The state is the symbol-side message density, starting from the
//! channel density `p0`; one round sends it through the check-side
//! mixture `rho` and back through the symbol-side mixture convolved
//! with the channel, `p0 (*) lambda(.)`. Iteration stops when the error
//! probability reaches the target, the round budget runs out, or the
//! trace reaches a fixed point. The decoding threshold of an ensemble
//! is located by bisection over the channel crossover probability.

mod curve;
mod transform;

pub use curve::{
    asymptotic_leakage_curve, build_threshold_table, reveal_threshold, CurveChoice, CurvePoint,
    PoolMember,
};

use crate::decoder::LLR_MAX;
use crate::error::{Error, Result};
use crate::linear_code::DegreeDistribution;
use transform::{check_transform, symbol_transform, Workspace};

/// Rounds before a run is declared non-converging.
pub const DEFAULT_MAX_ROUNDS: usize = 2000;
/// Error probability at which a run counts as converged.
pub const DEFAULT_TARGET_ERROR: f64 = 1e-6;
/// Bisection width for thresholds.
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-4;

/// Resolution of the LLR grid: `q` uniform intervals across
/// [-LLR_MAX, LLR_MAX], hence `q + 1` points including an exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    q: usize,
}

impl GridSpec {
    pub fn new(q: usize) -> Result<Self> {
        if q < 8 || q % 2 != 0 {
            return Err(Error::config(format!(
                "grid resolution must be an even number of intervals >= 8, got {q}"
            )));
        }
        Ok(GridSpec { q })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Points per half-axis; the grid holds `2 * half + 1` points.
    pub fn half(&self) -> usize {
        self.q / 2
    }

    pub fn delta(&self) -> f64 {
        LLR_MAX / self.half() as f64
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { q: 4096 }
    }
}

/// Probability mass on the LLR grid plus atoms at the two infinities.
/// Index `half + i` holds the point `i * delta` for `i` in `[-half, half]`.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    half: usize,
    delta: f64,
    mass: Vec<f64>,
    neg_inf: f64,
    pos_inf: f64,
}

impl DensityGrid {
    pub(crate) fn empty(half: usize, delta: f64) -> Self {
        DensityGrid {
            half,
            delta,
            mass: vec![0.0; 2 * half + 1],
            neg_inf: 0.0,
            pos_inf: 0.0,
        }
    }

    pub fn half(&self) -> usize {
        self.half
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub(crate) fn mass_mut(&mut self) -> &mut [f64] {
        &mut self.mass
    }

    pub fn pos_inf(&self) -> f64 {
        self.pos_inf
    }

    pub fn neg_inf(&self) -> f64 {
        self.neg_inf
    }

    pub(crate) fn pos_inf_mut(&mut self) -> &mut f64 {
        &mut self.pos_inf
    }

    pub(crate) fn neg_inf_mut(&mut self) -> &mut f64 {
        &mut self.neg_inf
    }

    /// Deposits mass at +-`magnitude` with a mean-preserving two-bin
    /// split; magnitudes at or beyond LLR_MAX land on the edge points.
    pub(crate) fn add_signed_magnitude(&mut self, magnitude: f64, plus: f64, minus: f64) {
        debug_assert!(magnitude >= 0.0);
        let pos = (magnitude / self.delta).min(self.half as f64);
        let k = pos.floor() as usize;
        let frac = pos - k as f64;
        let m = self.half;
        self.mass[m + k] += plus * (1.0 - frac);
        self.mass[m - k] += minus * (1.0 - frac);
        if frac > 0.0 {
            self.mass[m + k + 1] += plus * frac;
            self.mass[m - k - 1] += minus * frac;
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.neg_inf + self.pos_inf
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for m in &mut self.mass {
            *m *= factor;
        }
        self.neg_inf *= factor;
        self.pos_inf *= factor;
    }

    /// Mass on (-inf, 0) plus half the mass at exactly 0.
    pub fn error_probability(&self) -> f64 {
        let below: f64 = self.mass[..self.half].iter().sum();
        below + 0.5 * self.mass[self.half] + self.neg_inf
    }
}

/// An irregular ensemble together with the fractions of punctured
/// symbols (`pi`, channel LLR 0) and pre-known symbols (`sigma`,
/// channel LLR +infinity).
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    dist: DegreeDistribution,
    pi: f64,
    sigma: f64,
}

impl EnsembleSpec {
    pub fn new(dist: DegreeDistribution, pi: f64, sigma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pi) || !(0.0..=1.0).contains(&sigma) || pi + sigma > 1.0 {
            return Err(Error::config(format!(
                "punctured fraction {pi} and known fraction {sigma} must be nonnegative with sum <= 1"
            )));
        }
        Ok(EnsembleSpec { dist, pi, sigma })
    }

    pub fn dist(&self) -> &DegreeDistribution {
        &self.dist
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Channel density for crossover `eps` with punctured fraction `pi` and
/// known fraction `sigma`: mass at +-ln((1-eps)/eps), at 0, and at
/// +infinity respectively.
pub fn initial_density(eps: f64, pi: f64, sigma: f64, grid: &GridSpec) -> Result<DensityGrid> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::config(format!(
            "crossover probability must lie strictly between 0 and 0.5, got {eps}"
        )));
    }
    if !(0.0..=1.0).contains(&pi) || !(0.0..=1.0).contains(&sigma) || pi + sigma > 1.0 {
        return Err(Error::config(format!(
            "punctured fraction {pi} and known fraction {sigma} must be nonnegative with sum <= 1"
        )));
    }
    let mut out = DensityGrid::empty(grid.half(), grid.delta());
    let channel = 1.0 - pi - sigma;
    let llr = ((1.0 - eps) / eps).ln();
    out.add_signed_magnitude(llr, channel * (1.0 - eps), channel * eps);
    out.mass[grid.half()] += pi;
    out.pos_inf += sigma;
    Ok(out)
}

/// Outcome of an evolution run. The trace holds the error probability
/// before any round and after each executed round.
#[derive(Debug, Clone)]
pub struct EvolveReport {
    pub converged: bool,
    pub error_trace: Vec<f64>,
}

impl EvolveReport {
    pub fn final_error(&self) -> f64 {
        *self.error_trace.last().expect("trace is never empty")
    }

    pub fn rounds(&self) -> usize {
        self.error_trace.len() - 1
    }
}

/// Detects a numerical fixed point well short of the round budget.
/// Near-threshold runs move slowly but measurably; only a flat trace at
/// machine precision over 50 rounds is treated as stuck.
fn stalled(trace: &[f64]) -> bool {
    const WINDOW: usize = 50;
    if trace.len() <= WINDOW {
        return false;
    }
    let now = trace[trace.len() - 1];
    let then = trace[trace.len() - 1 - WINDOW];
    (then - now).abs() < 1e-12
}

pub fn evolve(
    spec: &EnsembleSpec,
    crossover: f64,
    grid: &GridSpec,
    max_rounds: usize,
    target_error: f64,
) -> Result<EvolveReport> {
    let p0 = initial_density(crossover, spec.pi, spec.sigma, grid)?;
    let mut ws = Workspace::new();
    let mut state = p0.clone();
    let mut trace = vec![state.error_probability()];
    while trace.len() <= max_rounds {
        if *trace.last().unwrap() <= target_error {
            break;
        }
        if stalled(&trace) {
            break;
        }
        let checked = check_transform(&state, spec.dist.rho(), &mut ws);
        state = symbol_transform(&p0, &checked, spec.dist.lambda(), &mut ws);
        // Per-round drift is floating-point only; renormalize so it
        // cannot accumulate across thousands of rounds.
        let total = state.total_mass();
        debug_assert!((total - 1.0).abs() < 1e-9, "mass drift {total}");
        state.scale(1.0 / total);
        trace.push(state.error_probability());
    }
    let converged = *trace.last().unwrap() <= target_error;
    Ok(EvolveReport {
        converged,
        error_trace: trace,
    })
}

fn converges(spec: &EnsembleSpec, eps: f64, grid: &GridSpec) -> Result<bool> {
    Ok(evolve(spec, eps, grid, DEFAULT_MAX_ROUNDS, DEFAULT_TARGET_ERROR)?.converged)
}

/// Largest crossover the ensemble decodes, located to width `tol` by
/// bisection. The returned midpoint converges at `threshold - tol` and
/// fails at `threshold + tol`.
pub fn threshold(spec: &EnsembleSpec, grid: &GridSpec, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::config(format!("bisection width must be positive, got {tol}")));
    }
    // Floor probe: an ensemble that cannot decode a near-noiseless
    // channel has no threshold at all.
    let mut lo = 1e-4;
    if !converges(spec, lo, grid)? {
        return Err(Error::runtime(
            "ensemble does not converge even as the crossover probability vanishes",
        ));
    }
    let mut hi = 0.499;
    if converges(spec, hi, grid)? {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if converges(spec, mid, grid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_six() -> DegreeDistribution {
        DegreeDistribution::new(vec![(3, 1.0)], vec![(6, 1.0)]).unwrap()
    }

    fn small_grid() -> GridSpec {
        GridSpec::new(512).unwrap()
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(7).is_err());
        assert!(GridSpec::new(6).is_err());
        assert!(GridSpec::new(4096).is_ok());
        let g = GridSpec::default();
        assert_eq!(g.q(), 4096);
        assert_eq!(g.half(), 2048);
        assert!((g.delta() - LLR_MAX / 2048.0).abs() < 1e-15);
    }

    #[test]
    fn initial_density_places_channel_mass() {
        let grid = GridSpec::new(1024).unwrap();
        let p = initial_density(0.1, 0.0, 0.0, &grid).unwrap();
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
        // Mean matches (1 - 2 eps) * ln((1-eps)/eps) exactly in spite of
        // the two-bin splits, because splitting preserves the mean.
        let mean: f64 = p
            .mass()
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64 - grid.half() as f64) * grid.delta() * v)
            .sum();
        let llr = (0.9f64 / 0.1).ln();
        assert!((mean - 0.8 * llr).abs() < 1e-12, "mean {mean}");
        assert!((p.error_probability() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn initial_density_atoms() {
        let grid = small_grid();
        let p = initial_density(0.05, 0.2, 0.3, &grid).unwrap();
        assert!((p.pos_inf() - 0.3).abs() < 1e-15);
        assert!((p.mass()[grid.half()] - 0.2).abs() < 1e-15);
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
        // Punctured mass counts half toward the error probability.
        let exact = (1.0 - 0.2 - 0.3) * 0.05 + 0.5 * 0.2;
        assert!(
            (p.error_probability() - exact).abs() < 1e-12,
            "{} vs {exact}",
            p.error_probability()
        );
    }

    #[test]
    fn initial_density_rejects_degenerate_channels() {
        let grid = small_grid();
        assert!(initial_density(0.0, 0.0, 0.0, &grid).is_err());
        assert!(initial_density(0.5, 0.0, 0.0, &grid).is_err());
        assert!(initial_density(-0.1, 0.0, 0.0, &grid).is_err());
        assert!(initial_density(0.1, 0.7, 0.4, &grid).is_err());
        assert!(initial_density(0.1, -0.1, 0.0, &grid).is_err());
    }

    #[test]
    fn all_known_converges_immediately() {
        let spec = EnsembleSpec::new(three_six(), 0.0, 1.0).unwrap();
        let report = evolve(&spec, 0.3, &small_grid(), 100, 1e-6).unwrap();
        assert!(report.converged);
        assert_eq!(report.error_trace[0], 0.0);
    }

    #[test]
    fn all_punctured_never_converges() {
        let spec = EnsembleSpec::new(three_six(), 1.0, 0.0).unwrap();
        let report = evolve(&spec, 0.1, &small_grid(), 500, 1e-6).unwrap();
        assert!(!report.converged);
        // Stuck at half the punctured mass, and the stall cutout fires
        // long before the round budget.
        assert!((report.final_error() - 0.5).abs() < 1e-9);
        assert!(report.rounds() < 200);
    }

    #[test]
    fn regular_ensemble_brackets_its_threshold() {
        let spec = EnsembleSpec::new(three_six(), 0.0, 0.0).unwrap();
        let grid = small_grid();
        let good = evolve(&spec, 0.07, &grid, DEFAULT_MAX_ROUNDS, 1e-6).unwrap();
        assert!(good.converged, "0.07 should decode; trace tail {:?}", good.error_trace.last());
        let bad = evolve(&spec, 0.10, &grid, DEFAULT_MAX_ROUNDS, 1e-6).unwrap();
        assert!(!bad.converged, "0.10 should not decode");
        assert!(bad.final_error() > 0.01);
    }

    #[test]
    fn error_trace_is_monotone_within_tolerance() {
        let spec = EnsembleSpec::new(three_six(), 0.0, 0.0).unwrap();
        let report = evolve(&spec, 0.08, &small_grid(), 400, 1e-6).unwrap();
        for w in report.error_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-6, "error rose from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn mass_conserved_across_rounds() {
        let spec = EnsembleSpec::new(three_six(), 0.05, 0.1).unwrap();
        let grid = small_grid();
        let p0 = initial_density(0.06, 0.05, 0.1, &grid).unwrap();
        let mut ws = Workspace::new();
        let mut state = p0.clone();
        for _ in 0..5 {
            let mixed = symbol_transform(&p0, &state, spec.dist().lambda(), &mut ws);
            state = check_transform(&mixed, spec.dist().rho(), &mut ws);
            assert!((state.total_mass() - 1.0).abs() < 1e-10, "mass {}", state.total_mass());
            assert!(state.mass().iter().all(|&x| x >= 0.0));
            assert!(state.neg_inf() >= 0.0 && state.pos_inf() >= 0.0);
        }
    }

    #[test]
    fn symmetry_defect_stays_small() {
        // An LLR-symmetric input (BSC density) should stay close to
        // symmetric: mass(-x) ~ exp(-x) mass(x) up to quantization.
        let spec = EnsembleSpec::new(three_six(), 0.0, 0.0).unwrap();
        let grid = GridSpec::new(1024).unwrap();
        let p0 = initial_density(0.08, 0.0, 0.0, &grid).unwrap();
        let mut ws = Workspace::new();
        let mut state = p0.clone();
        for _ in 0..3 {
            let mixed = symbol_transform(&p0, &state, spec.dist().lambda(), &mut ws);
            state = check_transform(&mixed, spec.dist().rho(), &mut ws);
        }
        let m = state.half();
        let defect: f64 = (1..=m)
            .map(|a| {
                let x = a as f64 * state.delta();
                (state.mass()[m - a] - (-x).exp() * state.mass()[m + a]).abs()
            })
            .sum();
        assert!(defect < 0.02, "symmetry defect {defect}");
    }

    #[test]
    fn threshold_of_three_six_at_coarse_grid() {
        let spec = EnsembleSpec::new(three_six(), 0.0, 0.0).unwrap();
        let th = threshold(&spec, &small_grid(), 1e-3).unwrap();
        assert!((th - 0.084).abs() < 0.005, "threshold {th}");
    }

    #[test]
    fn threshold_postcondition_brackets() {
        let spec = EnsembleSpec::new(three_six(), 0.0, 0.0).unwrap();
        let grid = small_grid();
        let tol = 2e-3;
        let th = threshold(&spec, &grid, tol).unwrap();
        assert!(converges(&spec, th - tol, &grid).unwrap());
        assert!(!converges(&spec, th + tol, &grid).unwrap());
    }

    #[test]
    fn known_fraction_raises_threshold_and_puncturing_lowers_it() {
        let grid = small_grid();
        let base = EnsembleSpec::new(three_six(), 0.0, 0.0).unwrap();
        let th_base = threshold(&base, &grid, 1e-3).unwrap();
        let known = EnsembleSpec::new(three_six(), 0.0, 0.10).unwrap();
        let th_known = threshold(&known, &grid, 1e-3).unwrap();
        assert!(
            th_known > th_base + 1e-3,
            "known fraction must strictly raise the threshold: {th_base} -> {th_known}"
        );
        // Puncturing cannot raise it; at this depth it clearly lowers it.
        let punct = EnsembleSpec::new(three_six(), 0.10, 0.0).unwrap();
        let th_punct = threshold(&punct, &grid, 1e-3).unwrap();
        assert!(
            th_punct <= th_base + 1e-3,
            "puncturing must not raise the threshold: {th_base} -> {th_punct}"
        );
    }

    #[test]
    fn hopeless_ensemble_reports_runtime_error() {
        let spec = EnsembleSpec::new(three_six(), 1.0, 0.0).unwrap();
        let err = threshold(&spec, &small_grid(), 1e-3).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
