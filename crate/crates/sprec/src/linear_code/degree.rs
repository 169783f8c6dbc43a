//! Edge-perspective degree distributions for irregular code ensembles.
//!
//! `lambda` gives the fraction of Tanner-graph edges incident to symbol
//! nodes of each degree, `rho` the same for check nodes. Design rate is
//! `1 - (sum rho_j / j) / (sum lambda_i / i)`.

use crate::error::{Error, Result};

const FRACTION_SUM_TOL: f64 = 1e-9;

/// A pair of edge-perspective degree distributions `(lambda, rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    lambda: Vec<(usize, f64)>,
    rho: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    /// Validates and normalizes a distribution pair.
    ///
    /// # Errors
    ///
    /// Rejects negative fractions, sums away from 1 (beyond 1e-9), symbol
    /// degrees below 1, check degrees below 2, and repeated degrees.
    pub fn new(lambda: Vec<(usize, f64)>, rho: Vec<(usize, f64)>) -> Result<Self> {
        let lambda = Self::validated_side(lambda, 1, "lambda")?;
        let rho = Self::validated_side(rho, 2, "rho")?;
        Ok(DegreeDistribution { lambda, rho })
    }

    fn validated_side(
        mut side: Vec<(usize, f64)>,
        min_degree: usize,
        name: &str,
    ) -> Result<Vec<(usize, f64)>> {
        side.retain(|&(_, f)| f != 0.0);
        if side.is_empty() {
            return Err(Error::config(format!("{name} has no positive fractions")));
        }
        side.sort_unstable_by_key(|&(d, _)| d);
        if side.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::config(format!("{name} repeats a degree")));
        }
        for &(d, f) in &side {
            if d < min_degree {
                return Err(Error::config(format!(
                    "{name} degree {d} below minimum {min_degree}"
                )));
            }
            if !f.is_finite() || f < 0.0 {
                return Err(Error::config(format!("{name} fraction {f} invalid")));
            }
        }
        let sum: f64 = side.iter().map(|&(_, f)| f).sum();
        if (sum - 1.0).abs() > FRACTION_SUM_TOL {
            return Err(Error::config(format!("{name} fractions sum to {sum}, not 1")));
        }
        Ok(side)
    }

    /// The `(d_v, d_c)`-regular ensemble, e.g. `regular(3, 6)` for rate 1/2.
    pub fn regular(symbol_degree: usize, check_degree: usize) -> Result<Self> {
        Self::new(vec![(symbol_degree, 1.0)], vec![(check_degree, 1.0)])
    }

    /// Builds a distribution with the given symbol side and a check side
    /// concentrated on two consecutive degrees chosen to hit `rate`.
    ///
    /// # Errors
    ///
    /// Fails when no concentrated check side realizes the rate (average
    /// check degree below 2) or `rate` is outside `(0, 1)`.
    pub fn with_target_rate(lambda: Vec<(usize, f64)>, rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) || rate <= 0.0 {
            return Err(Error::config(format!("target rate {rate} outside (0, 1)")));
        }
        let lambda = Self::validated_side(lambda, 1, "lambda")?;
        let int_lambda: f64 = lambda.iter().map(|&(d, f)| f / d as f64).sum();
        let int_rho = (1.0 - rate) * int_lambda;
        let avg = 1.0 / int_rho;
        if avg < 2.0 {
            return Err(Error::config(format!(
                "target rate {rate} needs average check degree {avg:.2} < 2"
            )));
        }
        let lo = avg.floor() as usize;
        let rho = if avg.fract().abs() < 1e-12 {
            vec![(lo, 1.0)]
        } else {
            // Split mass so that sum rho_j/j equals int_rho exactly.
            let hi = lo + 1;
            let f_lo = (lo * hi) as f64 * int_rho - lo as f64;
            vec![(lo, f_lo), (hi, 1.0 - f_lo)]
        };
        Self::new(lambda, rho)
    }

    pub fn lambda(&self) -> &[(usize, f64)] {
        &self.lambda
    }

    pub fn rho(&self) -> &[(usize, f64)] {
        &self.rho
    }

    /// `sum lambda_i / i`, the inverse average symbol degree.
    pub fn int_lambda(&self) -> f64 {
        self.lambda.iter().map(|&(d, f)| f / d as f64).sum()
    }

    /// `sum rho_j / j`, the inverse average check degree.
    pub fn int_rho(&self) -> f64 {
        self.rho.iter().map(|&(d, f)| f / d as f64).sum()
    }

    /// Design rate of the ensemble.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.int_rho() / self.int_lambda()
    }

    pub fn max_symbol_degree(&self) -> usize {
        self.lambda.last().map_or(0, |&(d, _)| d)
    }

    pub fn max_check_degree(&self) -> usize {
        self.rho.last().map_or(0, |&(d, _)| d)
    }

    /// Node-perspective fractions `(degree, fraction of nodes)`, symbol side.
    pub fn lambda_node_fractions(&self) -> Vec<(usize, f64)> {
        let norm = self.int_lambda();
        self.lambda
            .iter()
            .map(|&(d, f)| (d, f / d as f64 / norm))
            .collect()
    }

    /// Node-perspective fractions, check side.
    pub fn rho_node_fractions(&self) -> Vec<(usize, f64)> {
        let norm = self.int_rho();
        self.rho
            .iter()
            .map(|&(d, f)| (d, f / d as f64 / norm))
            .collect()
    }

    /// Integer degree sequences for a length-`n` realization:
    /// `(symbol degrees, check degrees)` with equal edge totals.
    ///
    /// Node counts use largest-remainder rounding against the node-perspective
    /// fractions; the check side is then nudged by at most one degree step per
    /// node to balance the edge count.
    ///
    /// # Errors
    ///
    /// Fails when `n` is too small to realize every degree class.
    pub fn node_degree_sequences(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let sym_counts = largest_remainder(&self.lambda_node_fractions(), n);
        if sym_counts.iter().any(|&(_, c)| c == 0) {
            return Err(Error::config(format!(
                "n = {n} cannot realize every symbol degree class"
            )));
        }
        let mut sym_degs: Vec<usize> = Vec::with_capacity(n);
        for &(d, c) in &sym_counts {
            sym_degs.extend(std::iter::repeat(d).take(c));
        }
        let edges: usize = sym_degs.iter().sum();

        let m_exact = edges as f64 * self.int_rho();
        let m = m_exact.round().max(1.0) as usize;
        if m >= n {
            return Err(Error::config(format!(
                "distribution yields {m} checks for n = {n}"
            )));
        }
        let mut chk_counts = largest_remainder(&self.rho_node_fractions(), m);
        // Both sides must emit the same edge total. Reconcile by moving
        // nodes between neighboring degree classes (cheapest distortion:
        // one move shifts the total by the class gap), falling back to
        // single off-class degree bumps only when no class pair fits.
        let mut delta =
            chk_counts.iter().map(|&(d, c)| (d * c) as isize).sum::<isize>() - edges as isize;
        while delta != 0 {
            if !shift_between_classes(&mut chk_counts, &mut delta) {
                break;
            }
        }
        let mut chk_degs: Vec<usize> = Vec::with_capacity(m);
        for &(d, c) in &chk_counts {
            chk_degs.extend(std::iter::repeat(d).take(c));
        }
        chk_degs.sort_unstable();
        while delta != 0 {
            let idx = chk_degs.len() - 1;
            if delta > 0 {
                if chk_degs[idx] <= 2 {
                    return Err(Error::config(format!(
                        "cannot balance edge totals for n = {n} without degree-1 checks"
                    )));
                }
                chk_degs[idx] -= 1;
                delta -= 1;
            } else {
                chk_degs[idx] += 1;
                delta += 1;
            }
            chk_degs.sort_unstable();
        }
        Ok((sym_degs, chk_degs))
    }
}

/// Moves one node between the adjacent degree-class pair whose gap best
/// reduces `delta` without overshooting. Returns false when no pair fits.
fn shift_between_classes(counts: &mut [(usize, usize)], delta: &mut isize) -> bool {
    let mut best: Option<(usize, usize, isize)> = None;
    for i in 0..counts.len().saturating_sub(1) {
        let (lo, hi) = (i, i + 1);
        let gap = (counts[hi].0 - counts[lo].0) as isize;
        if gap > delta.abs() {
            continue;
        }
        // delta > 0: too many check edges, demote a node hi -> lo.
        let from = if *delta > 0 { hi } else { lo };
        if counts[from].1 == 0 {
            continue;
        }
        if best.is_none_or(|(.., g)| gap > g) {
            best = Some((from, if *delta > 0 { lo } else { hi }, gap));
        }
    }
    let Some((from, to, gap)) = best else {
        return false;
    };
    counts[from].1 -= 1;
    counts[to].1 += 1;
    *delta -= gap * delta.signum();
    true
}

/// Apportions `total` items to classes by fraction, largest remainder first.
fn largest_remainder(fractions: &[(usize, f64)], total: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize, f64)> = fractions
        .iter()
        .map(|&(d, f)| {
            let exact = f * total as f64;
            (d, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let assigned: usize = out.iter().map(|&(_, c, _)| c).sum();
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| out[b].2.partial_cmp(&out[a].2).unwrap());
    for &i in order.iter().take(total - assigned) {
        out[i].1 += 1;
    }
    out.into_iter().map(|(d, c, _)| (d, c)).collect()
}

/// Parses an ensemble spec: a `lambda` section then a `rho` section, each a
/// list of `degree fraction` lines. `#` starts a comment.
///
/// ```text
/// lambda
/// 2 0.3
/// 3 0.3
/// 8 0.4
/// rho
/// 12 1.0
/// ```
///
/// # Errors
///
/// Reports the offending line number for malformed input.
pub fn parse_ensemble_spec(text: &str) -> Result<DegreeDistribution> {
    let mut lambda = Vec::new();
    let mut rho = Vec::new();
    let mut current: Option<&mut Vec<(usize, f64)>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "lambda" => current = Some(&mut lambda),
            "rho" => current = Some(&mut rho),
            _ => {
                let mut parts = line.split_whitespace();
                let degree: usize = parts
                    .next()
                    .unwrap()
                    .parse()
                    .map_err(|_| bad_line(lineno, "degree not an integer"))?;
                let fraction: f64 = parts
                    .next()
                    .ok_or_else(|| bad_line(lineno, "missing fraction"))?
                    .parse()
                    .map_err(|_| bad_line(lineno, "fraction not a number"))?;
                if parts.next().is_some() {
                    return Err(bad_line(lineno, "trailing tokens"));
                }
                match current.as_deref_mut() {
                    Some(side) => side.push((degree, fraction)),
                    None => return Err(bad_line(lineno, "entry before lambda/rho header")),
                }
            }
        }
    }
    DegreeDistribution::new(lambda, rho).map_err(|e| Error::data(format!("ensemble spec: {e}")))
}

fn bad_line(lineno: usize, msg: &str) -> Error {
    Error::data(format!("ensemble spec line {}: {msg}", lineno + 1))
}

/// Renders a distribution in the format accepted by [`parse_ensemble_spec`].
pub fn write_ensemble_spec(dist: &DegreeDistribution) -> String {
    let mut out = String::from("lambda\n");
    for &(d, f) in dist.lambda() {
        out.push_str(&format!("{d} {f}\n"));
    }
    out.push_str("rho\n");
    for &(d, f) in dist.rho() {
        out.push_str(&format!("{d} {f}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_rate_identity() {
        let d = DegreeDistribution::regular(3, 6).unwrap();
        assert!((d.design_rate() - 0.5).abs() < 1e-12);
        let (sym, chk) = d.node_degree_sequences(1200).unwrap();
        assert_eq!(sym.len(), 1200);
        assert_eq!(chk.len(), 600);
        assert!(sym.iter().all(|&x| x == 3));
        assert!(chk.iter().all(|&x| x == 6));
    }

    #[test]
    fn validation_rejects_bad_sides() {
        assert!(DegreeDistribution::new(vec![(2, 0.5)], vec![(6, 1.0)]).is_err());
        assert!(DegreeDistribution::new(vec![(0, 1.0)], vec![(6, 1.0)]).is_err());
        assert!(DegreeDistribution::new(vec![(2, 1.0)], vec![(1, 1.0)]).is_err());
        assert!(DegreeDistribution::new(vec![(2, 0.5), (2, 0.5)], vec![(6, 1.0)]).is_err());
        assert!(DegreeDistribution::new(vec![(2, -0.2), (3, 1.2)], vec![(6, 1.0)]).is_err());
    }

    #[test]
    fn target_rate_hits_design_rate() {
        for rate in [0.3, 0.5, 0.64, 0.8, 0.92] {
            let d = DegreeDistribution::with_target_rate(
                vec![(2, 0.3), (3, 0.3), (8, 0.4)],
                rate,
            )
            .unwrap();
            assert!(
                (d.design_rate() - rate).abs() < 1e-9,
                "rate {rate} -> {}",
                d.design_rate()
            );
        }
    }

    #[test]
    fn degree_sequences_balance_edges() {
        let d = DegreeDistribution::with_target_rate(
            vec![(2, 0.25), (3, 0.35), (8, 0.4)],
            0.62,
        )
        .unwrap();
        let (sym, chk) = d.node_degree_sequences(5000).unwrap();
        assert_eq!(
            sym.iter().sum::<usize>(),
            chk.iter().sum::<usize>(),
            "edge totals must match"
        );
        let rate = 1.0 - chk.len() as f64 / sym.len() as f64;
        assert!((rate - 0.62).abs() < 0.01, "realized rate {rate}");
    }

    #[test]
    fn spec_round_trip() {
        let d = DegreeDistribution::new(
            vec![(2, 0.25), (3, 0.35), (8, 0.4)],
            vec![(11, 0.6), (12, 0.4)],
        )
        .unwrap();
        let text = write_ensemble_spec(&d);
        assert_eq!(parse_ensemble_spec(&text).unwrap(), d);
    }

    #[test]
    fn spec_parse_errors_carry_line_numbers() {
        let err = parse_ensemble_spec("lambda\n2 0.5\nx 0.5\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse_ensemble_spec("2 1.0\nrho\n6 1.0\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let d = parse_ensemble_spec("# header\nlambda\n3 1.0 # all degree 3\n\nrho\n6 1.0\n")
            .unwrap();
        assert_eq!(d, DegreeDistribution::regular(3, 6).unwrap());
    }
}
