//! Result emission: CSV files with a self-describing comment block.
//!
//! Every output starts with `#`-prefixed metadata lines (tool version,
//! experiment, a digest of the effective configuration, the master seed,
//! then one line per configuration entry), followed by a header row and
//! fixed-precision data rows. Two runs with the same configuration and
//! seed produce byte-identical files; wall-clock times stay out of the
//! CSV and appear only in the human-readable summary.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;

/// Digest of the effective configuration: SHA-256 over the canonical
/// `key = value` lines, newline-terminated each.
pub fn config_digest(config: &ExperimentConfig) -> String {
    let mut hasher = Sha256::new();
    for (key, value) in config.canonical_entries() {
        hasher.update(key.as_bytes());
        hasher.update(b" = ");
        hasher.update(value.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").unwrap();
    }
    hex
}

/// A CSV document under construction: metadata block, header, rows.
pub struct CsvDocument {
    lines: Vec<String>,
}

impl CsvDocument {
    pub fn new(config: &ExperimentConfig, header: &str) -> Self {
        let mut lines = vec![
            format!("# sprec {}", env!("CARGO_PKG_VERSION")),
            format!("# experiment: {}", config.experiment),
            format!("# config-sha256: {}", config_digest(config)),
            format!("# master-seed: {}", config.seed),
        ];
        for (key, value) in config.canonical_entries() {
            lines.push(format!("# cfg {key} = {value}"));
        }
        lines.push(header.to_string());
        CsvDocument { lines }
    }

    pub fn push_row(&mut self, row: String) {
        self.lines.push(row);
    }

    pub fn render(&self) -> String {
        let mut text = self.lines.join("\n");
        text.push('\n');
        text
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let with_context = |what: &str, e: std::io::Error| {
            Error::Io(std::io::Error::new(e.kind(), format!("{what}: {e}")))
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .map_err(|e| with_context(&format!("creating {}", parent.display()), e))?;
            }
        }
        std::fs::write(path, self.render())
            .map_err(|e| with_context(&format!("writing {}", path.display()), e))
    }
}

/// Fixed-precision float cell; `na` marks an undefined value.
pub fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.6}"),
        None => "na".to_string(),
    }
}

/// Float cell with scientific notation for wide-range columns.
pub fn cell_sci(value: f64) -> String {
    format!("{value:.6e}")
}

/// Sample mean and the standard error of the mean (ddof = 1).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{Experiment, Overrides};

    fn sample_config() -> ExperimentConfig {
        ExperimentConfig::build(Experiment::CascadeTable, Some("seed = 42"), &Overrides::default())
            .unwrap()
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = config_digest(&sample_config());
        let b = config_digest(&sample_config());
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        let other = ExperimentConfig::build(
            Experiment::CascadeTable,
            Some("seed = 43"),
            &Overrides::default(),
        )
        .unwrap();
        assert_ne!(a, config_digest(&other));
    }

    #[test]
    fn document_layout() {
        let mut doc = CsvDocument::new(&sample_config(), "a,b");
        doc.push_row("1,2".into());
        let text = doc.render();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# sprec "));
        assert_eq!(lines[1], "# experiment: cascade-table");
        assert!(lines[2].starts_with("# config-sha256: "));
        assert_eq!(lines[3], "# master-seed: 42");
        // Comment block ends right before the header row.
        let header_at = lines.iter().position(|l| *l == "a,b").unwrap();
        assert!(lines[..header_at].iter().all(|l| l.starts_with('#')));
        assert_eq!(lines[header_at + 1], "1,2");
    }

    #[test]
    fn cells_and_stats() {
        assert_eq!(cell(Some(0.25)), "0.250000");
        assert_eq!(cell(None), "na");
        assert_eq!(cell_sci(12345.0), "1.234500e4");
        let (mean, se) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert!((mean - 2.0).abs() < 1e-12);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_stderr(&[5.0]), (5.0, 0.0));
    }
}
