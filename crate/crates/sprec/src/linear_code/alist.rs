//! Reader and writer for the MacKay alist text format.
//!
//! Layout: `n m`, then `max_col_deg max_row_deg`, then n column degrees,
//! then m row degrees, then one neighbor line per column (1-indexed row
//! indices) and one per row (1-indexed column indices). Writers differ on
//! padding; zeros are accepted only beyond a node's declared degree.

use std::fmt::Write as _;
use std::path::Path;

use super::SparseLinearCode;
use crate::error::{Error, Result};

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            iter: text.lines().enumerate(),
        }
    }

    /// Next non-blank line as parsed integers with its 1-based line number.
    fn numbers(&mut self) -> Result<(usize, Vec<i64>)> {
        for (idx, line) in self.iter.by_ref() {
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let mut out = Vec::new();
            for tok in line.split_whitespace() {
                let v: i64 = tok
                    .parse()
                    .map_err(|_| Error::data(format!("line {lineno}: expected integer, got {tok:?}")))?;
                out.push(v);
            }
            return Ok((lineno, out));
        }
        Err(Error::data("unexpected end of file"))
    }
}

fn neighbor_row(
    lines: &mut Lines<'_>,
    declared: usize,
    limit: usize,
    what: &str,
    node: usize,
) -> Result<Vec<u32>> {
    let (lineno, vals) = lines.numbers()?;
    if vals.len() < declared {
        return Err(Error::data(format!(
            "line {lineno}: {what} {node} lists {} neighbors, degree says {declared}",
            vals.len()
        )));
    }
    let mut out = Vec::with_capacity(declared);
    for (pos, &v) in vals.iter().enumerate() {
        if pos < declared {
            if v < 1 || v as usize > limit {
                return Err(Error::data(format!(
                    "line {lineno}: neighbor index {v} out of range 1..={limit} (alist is 1-indexed)"
                )));
            }
            out.push((v - 1) as u32);
        } else if v != 0 {
            return Err(Error::data(format!(
                "line {lineno}: nonzero entry {v} beyond declared degree {declared}"
            )));
        }
    }
    Ok(out)
}

/// Parses alist text into a code. Errors carry the offending line number.
pub fn parse_alist(text: &str) -> Result<SparseLinearCode> {
    let mut lines = Lines::new(text);

    let (lineno, header) = lines.numbers()?;
    let [n, m] = header[..] else {
        return Err(Error::data(format!(
            "line {lineno}: header must be exactly `n m`"
        )));
    };
    if n <= 0 || m <= 0 {
        return Err(Error::data(format!("line {lineno}: dimensions must be positive")));
    }
    let (n, m) = (n as usize, m as usize);

    let (lineno, maxima) = lines.numbers()?;
    let [max_col, max_row] = maxima[..] else {
        return Err(Error::data(format!(
            "line {lineno}: expected `max_col_degree max_row_degree`"
        )));
    };

    let col_degs = degree_line(&mut lines, n, max_col, "column")?;
    let row_degs = degree_line(&mut lines, m, max_row, "row")?;

    let mut rows_from_cols: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (col, &deg) in col_degs.iter().enumerate() {
        for check in neighbor_row(&mut lines, deg, m, "column", col + 1)? {
            rows_from_cols[check as usize].push(col as u32);
        }
    }

    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(m);
    for (row, &deg) in row_degs.iter().enumerate() {
        rows.push(neighbor_row(&mut lines, deg, n, "row", row + 1)?);
    }

    // The two halves describe the same matrix; a mismatch means corruption.
    for (i, (a, b)) in rows.iter().zip(&rows_from_cols).enumerate() {
        let mut a = a.clone();
        let mut b = b.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::data(format!(
                "row {} disagrees between the column and row sections",
                i + 1
            )));
        }
    }

    SparseLinearCode::new(n, rows)
}

fn degree_line(lines: &mut Lines<'_>, count: usize, max: i64, what: &str) -> Result<Vec<usize>> {
    let (lineno, vals) = lines.numbers()?;
    if vals.len() != count {
        return Err(Error::data(format!(
            "line {lineno}: expected {count} {what} degrees, got {}",
            vals.len()
        )));
    }
    vals.iter()
        .map(|&v| {
            if v < 1 || v > max {
                Err(Error::data(format!(
                    "line {lineno}: {what} degree {v} outside 1..={max}"
                )))
            } else {
                Ok(v as usize)
            }
        })
        .collect()
}

/// Renders a code as alist text (padded columns per the original format).
pub fn format_alist(code: &SparseLinearCode) -> String {
    let n = code.n();
    let m = code.num_checks();
    let mut cols: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (r, row) in code.checks().enumerate() {
        for &c in row {
            cols[c as usize].push(r as u32);
        }
    }
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = code.checks().map(<[u32]>::len).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_col} {max_row}");
    let degs = |it: &mut dyn Iterator<Item = usize>| {
        it.map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "{}", degs(&mut cols.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", degs(&mut code.checks().map(<[u32]>::len)));
    let neighbor_line = |out: &mut String, neigh: &[u32], width: usize| {
        let mut parts: Vec<String> = neigh.iter().map(|&v| (v + 1).to_string()).collect();
        parts.resize(width, "0".to_string());
        let _ = writeln!(out, "{}", parts.join(" "));
    };
    for col in &cols {
        neighbor_line(&mut out, col, max_col);
    }
    for row in code.checks() {
        neighbor_line(&mut out, row, max_row);
    }
    out
}

/// Loads a parity-check matrix from an alist file.
pub fn load_alist(path: impl AsRef<Path>) -> Result<SparseLinearCode> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    parse_alist(&text).map_err(|e| Error::data(format!("{}: {e}", path.display())))
}

/// Saves a parity-check matrix to an alist file.
pub fn save_alist(code: &SparseLinearCode, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, format_alist(code))?)
}

#[cfg(test)]
mod tests {
    use super::super::{construct, DegreeDistribution};
    use super::*;

    /// 6 columns, 3 rows: row 1 = {1,2,3}, row 2 = {3,4,5}, row 3 = {1,5,6}
    /// in 1-indexed terms, written with per-column padding.
    const HAND_WRITTEN: &str = "\
6 3
2 3
2 1 2 1 2 1
3 3 3
1 3 0
1 0 0
1 2 0
2 0 0
2 3 0
3 0 0
1 2 3
3 4 5
1 5 6
";

    #[test]
    fn hand_written_row_sets() {
        let code = parse_alist(HAND_WRITTEN).unwrap();
        assert_eq!(code.n(), 6);
        let rows: Vec<&[u32]> = code.checks().collect();
        assert_eq!(rows, vec![&[0, 1, 2][..], &[2, 3, 4], &[0, 4, 5]]);
    }

    #[test]
    fn round_trip_is_identity() {
        let dist = DegreeDistribution::new(
            vec![(2, 0.4), (3, 0.6)],
            vec![(5, 0.7), (6, 0.3)],
        )
        .unwrap();
        let code = construct(&dist, 120, 11).unwrap();
        let reparsed = parse_alist(&format_alist(&code)).unwrap();
        assert_eq!(code, reparsed);
    }

    #[test]
    fn zero_neighbor_within_degree_rejected() {
        let bad = HAND_WRITTEN.replace("1 3 0", "0 3 0");
        let err = parse_alist(&bad).unwrap_err();
        assert!(err.to_string().contains("1-indexed"), "{err}");
        assert!(err.to_string().contains("line 5"), "{err}");
    }

    #[test]
    fn nonzero_padding_rejected() {
        let bad = HAND_WRITTEN.replace("1 0 0\n1 2 0", "1 0 1\n1 2 0");
        let err = parse_alist(&bad).unwrap_err();
        assert!(err.to_string().contains("beyond declared degree"), "{err}");
    }

    #[test]
    fn out_of_range_index_rejected() {
        let bad = HAND_WRITTEN.replace("3 4 5", "3 4 7");
        let err = parse_alist(&bad).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn section_disagreement_rejected() {
        let bad = HAND_WRITTEN.replace("3 4 5", "2 4 5");
        let err = parse_alist(&bad).unwrap_err();
        assert!(err.to_string().contains("disagrees"), "{err}");
    }

    #[test]
    fn unpadded_neighbor_lines_accepted() {
        let unpadded = HAND_WRITTEN
            .replace(" 0 0", "")
            .replace(" 0\n", "\n");
        let code = parse_alist(&unpadded).unwrap();
        assert_eq!(code, parse_alist(HAND_WRITTEN).unwrap());
    }

    #[test]
    fn truncated_file_reports_eof() {
        let cut: String = HAND_WRITTEN.lines().take(7).collect::<Vec<_>>().join("\n");
        assert!(parse_alist(&cut).is_err());
    }
}
