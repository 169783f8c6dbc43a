//! Grid transforms for one density-evolution round.
//!
//! Symbol nodes add LLRs: a convolution on the uniform LLR grid, done in
//! the frequency domain with a wrapped (circular) layout so that all
//! mixture powers share one origin.
//!
//! Check nodes combine magnitudes as R(a, b) = 2 atanh(tanh(a/2)
//! tanh(b/2)) with signs multiplying. R never exceeds min(a, b) and
//! falls short of it by less than half a grid step once |a - b| is
//! large, so the pairwise operation splits into an exact table over a
//! diagonal band plus a min rule outside it, evaluated with suffix
//! sums. Signs ride along as the difference vector (mass with sign +
//! minus mass with sign -), which check combination multiplies
//! componentwise. Atoms are exact: +-infinity is the identity of R with
//! a sign, mass at L = 0 is absorbing, and both stay out of the banded
//! loop as scalars.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::DensityGrid;

pub(crate) struct Workspace {
    planner: FftPlanner<f64>,
    check_table: Option<CheckTable>,
}

impl Workspace {
    pub(crate) fn new() -> Self {
        Workspace {
            planner: FftPlanner::new(),
            check_table: None,
        }
    }

    fn forward(&mut self, real: &[f64], size: usize) -> Vec<Complex<f64>> {
        debug_assert!(real.len() <= size);
        let mut buf: Vec<Complex<f64>> = real.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(size, Complex::new(0.0, 0.0));
        self.planner.plan_fft_forward(size).process(&mut buf);
        buf
    }

    fn inverse(&mut self, mut freq: Vec<Complex<f64>>) -> Vec<f64> {
        let size = freq.len();
        self.planner.plan_fft_inverse(size).process(&mut freq);
        freq.into_iter().map(|c| c.re / size as f64).collect()
    }

    fn check_table(&mut self, m: usize, delta: f64) -> &CheckTable {
        let stale = self
            .check_table
            .as_ref()
            .is_none_or(|t| t.m != m || t.delta != delta);
        if stale {
            self.check_table = Some(CheckTable::build(m, delta));
        }
        self.check_table.as_ref().unwrap()
    }
}

/// Quantized pairwise check rule for magnitude bins `(lo, lo + diff)`
/// with `diff <= band`: the output splits between bins `k` and `k + 1`
/// with fraction `frac`, preserving the mean.
struct CheckTable {
    m: usize,
    delta: f64,
    band: usize,
    k: Vec<u16>,
    frac: Vec<f64>,
}

/// R(a, b) for 0 < a <= b, stable for magnitudes up to LLR_MAX.
fn check_rule(a: f64, b: f64) -> f64 {
    a + (-(a + b)).exp().ln_1p() - (-(b - a)).exp().ln_1p()
}

impl CheckTable {
    fn build(m: usize, delta: f64) -> Self {
        // Beyond the band the rule is min(a, b) to within delta / 1000;
        // the shortfall is one-sided, so it must stay far below the bin
        // width or it compounds into a visible threshold shift.
        let band = ((1000.0 / delta).ln() / delta).ceil() as usize;
        let width = band + 1;
        let mut k = vec![0u16; m * width];
        let mut frac = vec![0.0; m * width];
        for lo in 1..=m {
            for diff in 0..width.min(m - lo + 1) {
                let r = check_rule(lo as f64 * delta, (lo + diff) as f64 * delta);
                let pos = r / delta;
                let idx = (lo - 1) * width + diff;
                k[idx] = pos.floor() as u16;
                frac[idx] = pos - pos.floor();
            }
        }
        CheckTable {
            m,
            delta,
            band,
            k,
            frac,
        }
    }
}

/// Finite grid mass split by magnitude, with the absorbing zero bin and
/// the infinity atoms held separately. `u` is total mass per magnitude,
/// `v` the signed difference, both indexed 1..=m ([0] unused).
#[derive(Clone)]
struct SignedMagnitudes {
    u: Vec<f64>,
    v: Vec<f64>,
    zero: f64,
    atom_sum: f64,
    atom_diff: f64,
}

impl SignedMagnitudes {
    fn from_grid(p: &DensityGrid) -> Self {
        let m = p.half();
        let mut u = vec![0.0; m + 1];
        let mut v = vec![0.0; m + 1];
        for a in 1..=m {
            let plus = p.mass()[m + a];
            let minus = p.mass()[m - a];
            u[a] = plus + minus;
            v[a] = plus - minus;
        }
        SignedMagnitudes {
            u,
            v,
            zero: p.mass()[m],
            atom_sum: p.pos_inf() + p.neg_inf(),
            atom_diff: p.pos_inf() - p.neg_inf(),
        }
    }

    fn zeros(m: usize) -> Self {
        SignedMagnitudes {
            u: vec![0.0; m + 1],
            v: vec![0.0; m + 1],
            zero: 0.0,
            atom_sum: 0.0,
            atom_diff: 0.0,
        }
    }

    fn accumulate(&mut self, other: &SignedMagnitudes, coeff: f64) {
        for i in 0..self.u.len() {
            self.u[i] += coeff * other.u[i];
            self.v[i] += coeff * other.v[i];
        }
        self.zero += coeff * other.zero;
        self.atom_sum += coeff * other.atom_sum;
        self.atom_diff += coeff * other.atom_diff;
    }

    fn into_grid(self, m: usize, delta: f64) -> DensityGrid {
        let mut out = DensityGrid::empty(m, delta);
        out.mass_mut()[m] = self.zero;
        for a in 1..=m {
            out.mass_mut()[m + a] = (0.5 * (self.u[a] + self.v[a])).max(0.0);
            out.mass_mut()[m - a] = (0.5 * (self.u[a] - self.v[a])).max(0.0);
        }
        *out.pos_inf_mut() = (0.5 * (self.atom_sum + self.atom_diff)).max(0.0);
        *out.neg_inf_mut() = (0.5 * (self.atom_sum - self.atom_diff)).max(0.0);
        out
    }
}

/// One pairwise check combination of two independent densities.
fn fold(acc: &SignedMagnitudes, p: &SignedMagnitudes, tbl: &CheckTable) -> SignedMagnitudes {
    let m = tbl.m;
    let width = tbl.band + 1;
    let mut out = SignedMagnitudes::zeros(m);

    // Zero absorbs; infinities multiply signs and pass the partner through.
    out.zero = acc.zero + p.zero - acc.zero * p.zero;
    out.atom_sum = acc.atom_sum * p.atom_sum;
    out.atom_diff = acc.atom_diff * p.atom_diff;
    for a in 1..=m {
        out.u[a] += acc.atom_sum * p.u[a] + p.atom_sum * acc.u[a];
        out.v[a] += acc.atom_diff * p.v[a] + p.atom_diff * acc.v[a];
    }

    // Far pairs: |i - j| > band, output lands exactly on the smaller bin.
    let mut suffix_u_p = vec![0.0; m + 2];
    let mut suffix_v_p = vec![0.0; m + 2];
    let mut suffix_u_a = vec![0.0; m + 2];
    let mut suffix_v_a = vec![0.0; m + 2];
    for i in (1..=m).rev() {
        suffix_u_p[i] = suffix_u_p[i + 1] + p.u[i];
        suffix_v_p[i] = suffix_v_p[i + 1] + p.v[i];
        suffix_u_a[i] = suffix_u_a[i + 1] + acc.u[i];
        suffix_v_a[i] = suffix_v_a[i + 1] + acc.v[i];
    }
    for i in 1..=m {
        let start = i + tbl.band + 1;
        if start > m {
            break;
        }
        out.u[i] += acc.u[i] * suffix_u_p[start] + p.u[i] * suffix_u_a[start];
        out.v[i] += acc.v[i] * suffix_v_p[start] + p.v[i] * suffix_v_a[start];
    }

    // Near pairs: exact table with a mean-preserving two-bin split.
    for i in 1..=m {
        let (ua, va) = (acc.u[i], acc.v[i]);
        if ua == 0.0 {
            continue;
        }
        let j_lo = i.saturating_sub(tbl.band).max(1);
        let j_hi = (i + tbl.band).min(m);
        for j in j_lo..=j_hi {
            let up = p.u[j];
            if up == 0.0 {
                continue;
            }
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            let idx = (lo - 1) * width + (hi - lo);
            let k = tbl.k[idx] as usize;
            let f = tbl.frac[idx];
            let mu = ua * up;
            let mv = va * p.v[j];
            if k == 0 {
                out.zero += mu * (1.0 - f);
            } else {
                out.u[k] += mu * (1.0 - f);
                out.v[k] += mv * (1.0 - f);
            }
            out.u[k + 1] += mu * f;
            out.v[k + 1] += mv * f;
        }
    }
    out
}

/// Check-node mixture: applies `sum_j rho_j C^(j-1)` to `p`, where `C`
/// is the pairwise check combination.
pub(crate) fn check_transform(
    p: &DensityGrid,
    rho: &[(usize, f64)],
    ws: &mut Workspace,
) -> DensityGrid {
    let m = p.half();
    let delta = p.delta();
    ws.check_table(m, delta);
    let tbl = ws.check_table.as_ref().unwrap();

    let base = SignedMagnitudes::from_grid(p);
    let mut acc = base.clone();
    let mut out = SignedMagnitudes::zeros(m);
    let dc_max = rho.last().map_or(2, |&(d, _)| d);
    let mut rho_iter = rho.iter().peekable();
    for j in 2..=dc_max {
        if j > 2 {
            acc = fold(&acc, &base, tbl);
        }
        if rho_iter.peek().is_some_and(|&&(d, _)| d == j) {
            let (_, coeff) = *rho_iter.next().unwrap();
            out.accumulate(&acc, coeff);
        }
    }
    out.into_grid(m, delta)
}

/// Symbol-node mixture convolved with the channel density:
/// `p0 (*) sum_d lambda_d q^{(*)(d-1)}`.
pub(crate) fn symbol_transform(
    p0: &DensityGrid,
    q: &DensityGrid,
    lambda: &[(usize, f64)],
    ws: &mut Workspace,
) -> DensityGrid {
    let m = p0.half();
    let delta = p0.delta();
    debug_assert_eq!(m, q.half());

    let dv_max = lambda.last().map_or(1, |&(d, _)| d);
    let size = (2 * dv_max * m + 1).next_power_of_two();

    // Wrapped layout: index 0 holds L = 0, index a holds +a*delta, index
    // size - a holds -a*delta, so every convolution power keeps origin 0.
    let wrap = |grid: &DensityGrid| -> Vec<f64> {
        let mut w = vec![0.0; size];
        w[0] = grid.mass()[m];
        for a in 1..=m {
            w[a] = grid.mass()[m + a];
            w[size - a] = grid.mass()[m - a];
        }
        w
    };
    let p0_hat = ws.forward(&wrap(p0), size);
    let q_hat = ws.forward(&wrap(q), size);

    let mut acc = vec![Complex::new(0.0, 0.0); size];
    let mut cur = vec![Complex::new(1.0, 0.0); size];
    let mut lambda_iter = lambda.iter().peekable();
    for d in 1..=dv_max {
        if d > 1 {
            for i in 0..size {
                cur[i] *= q_hat[i];
            }
        }
        if lambda_iter.peek().is_some_and(|&&(deg, _)| deg == d) {
            let (_, coeff) = *lambda_iter.next().unwrap();
            for i in 0..size {
                acc[i] += cur[i] * coeff;
            }
        }
    }
    for i in 0..size {
        acc[i] *= p0_hat[i];
    }
    let fin = ws.inverse(acc);

    let mut out = DensityGrid::empty(m, delta);
    out.mass_mut()[m] = fin[0].max(0.0);
    for a in 1..=dv_max * m {
        let plus = fin[a].max(0.0);
        let minus = fin[size - a].max(0.0);
        // Beyond the grid edge the decoder would have clipped: saturate.
        let idx = a.min(m);
        out.mass_mut()[m + idx] += plus;
        out.mass_mut()[m - idx] += minus;
    }

    // Infinite inputs dominate finite sums; with no negative atom in
    // play the output atom is one minus the all-finite probability.
    debug_assert!(p0.neg_inf() < 1e-12 && q.neg_inf() < 1e-12);
    let fin_q = 1.0 - q.pos_inf();
    let mix: f64 = lambda
        .iter()
        .map(|&(d, f)| f * fin_q.powi(d as i32 - 1))
        .sum();
    *out.pos_inf_mut() = 1.0 - (1.0 - p0.pos_inf()) * mix;
    out
}
