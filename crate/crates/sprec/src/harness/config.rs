//! Plain-text key = value experiment configuration.
//!
//! A config file holds one `key = value` pair per line with `#` comments.
//! Command-line flags override the file. Every effective entry, including
//! defaulted ones, is echoed into the output's comment block and hashed,
//! so a result file pins the exact configuration that produced it. The
//! output path is the one exception: it steers where the file lands, so
//! moving the destination never changes the bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linear_code::{load_alist, parse_ensemble_spec, DegreeDistribution, SparseLinearCode};

/// The four experiment kinds the harness can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    CascadeTable,
    LeakageCurve,
    FiniteKeyCurve,
    SingleRun,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::CascadeTable => "cascade-table",
            Experiment::LeakageCurve => "leakage-curve",
            Experiment::FiniteKeyCurve => "finite-key-curve",
            Experiment::SingleRun => "single-run",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cascade-table" => Ok(Experiment::CascadeTable),
            "leakage-curve" => Ok(Experiment::LeakageCurve),
            "finite-key-curve" => Ok(Experiment::FiniteKeyCurve),
            "single-run" => Ok(Experiment::SingleRun),
            other => Err(Error::config(format!(
                "unknown experiment {other:?}; expected cascade-table, leakage-curve, finite-key-curve or single-run"
            ))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which protocols a finite-key sweep includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolTag {
    Perfect,
    Sp,
    Cascade,
}

impl ProtocolTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolTag::Perfect => "perfect",
            ProtocolTag::Sp => "sp",
            ProtocolTag::Cascade => "cascade",
        }
    }
}

impl FromStr for ProtocolTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(ProtocolTag::Perfect),
            "sp" => Ok(ProtocolTag::Sp),
            "cascade" => Ok(ProtocolTag::Cascade),
            other => Err(Error::config(format!(
                "unknown protocol {other:?}; expected perfect, sp or cascade"
            ))),
        }
    }
}

impl fmt::Display for ProtocolTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parses the `key = value` format; duplicate keys are rejected.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(format!(
                "config line {}: expected key = value, got {raw:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::config(format!(
                "config line {}: empty key or value in {raw:?}",
                lineno + 1
            )));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::config(format!(
                "config line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Settings for the Cascade leakage table.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTableConfig {
    pub lengths: Vec<usize>,
    pub qbers: Vec<f64>,
}

/// Settings for the asymptotic leakage comparison.
#[derive(Debug, Clone)]
pub struct LeakageCurveConfig {
    pub qbers: Vec<f64>,
    pub d_over_n: f64,
    /// Density-evolution grid intervals.
    pub de_grid: usize,
    /// String length for the Cascade reference measurements.
    pub cascade_length: usize,
    /// Pool ensembles from files; empty means the built-in pool.
    pub ensembles: Vec<(PathBuf, DegreeDistribution)>,
}

/// Settings for the rate-versus-signals sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKeyCurveConfig {
    pub qbers: Vec<f64>,
    pub n_start: u64,
    pub n_end: u64,
    pub n_points: usize,
    pub protocols: Vec<ProtocolTag>,
    pub eps_total: f64,
    pub eps_ec: f64,
    /// Coefficient of the 1/sqrt(t) finite-length leakage penalty of the
    /// syndrome protocol.
    pub sp_finite_coeff: f64,
    pub cascade_length: usize,
}

/// Settings for one reconciliation run.
#[derive(Debug, Clone)]
pub struct SingleRunConfig {
    pub qber: f64,
    pub n: usize,
    pub rate: f64,
    pub d_over_n: f64,
    pub protocol: ProtocolTag,
    /// Positions disclosed for the error-rate estimate.
    pub est_sample: usize,
    /// Mother code from a file; otherwise constructed from the built-in
    /// pool ensemble at `rate`.
    pub code: Option<(PathBuf, SparseLinearCode)>,
}

/// Fully resolved configuration: experiment kind, common knobs, and the
/// per-experiment settings block.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: usize,
    pub out: PathBuf,
    pub cascade_table: Option<CascadeTableConfig>,
    pub leakage_curve: Option<LeakageCurveConfig>,
    pub finite_key_curve: Option<FiniteKeyCurveConfig>,
    pub single_run: Option<SingleRunConfig>,
    /// Effective entries in canonical order, for hashing and echoing.
    canonical: Vec<(String, String)>,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Typed read of one key with a default; the effective value is recorded.
struct Reader {
    map: BTreeMap<String, String>,
    used: Vec<(String, String)>,
}

impl Reader {
    fn new(map: BTreeMap<String, String>) -> Self {
        Reader {
            map,
            used: Vec::new(),
        }
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn record(&mut self, key: &str, value: impl fmt::Display) {
        self.used.push((key.to_string(), value.to_string()));
    }

    fn get<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let value = match self.take_raw(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|e| Error::config(format!("config key {key}: {e}")))?,
            None => default,
        };
        self.record(key, &value);
        Ok(value)
    }

    fn get_list<T>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: FromStr + fmt::Display + Clone,
        T::Err: fmt::Display,
    {
        let values = match self.take_raw(key) {
            Some(raw) => raw
                .split(',')
                .map(|part| {
                    part.trim()
                        .parse::<T>()
                        .map_err(|e| Error::config(format!("config key {key}: {e}")))
                })
                .collect::<Result<Vec<T>>>()?,
            None => default.to_vec(),
        };
        if values.is_empty() {
            return Err(Error::config(format!("config key {key}: empty list")));
        }
        let rendered: Vec<String> = values.iter().map(T::to_string).collect();
        self.record(key, rendered.join(","));
        Ok(values)
    }

    /// Every recognized key must have been consumed by now.
    fn finish(self) -> Result<Vec<(String, String)>> {
        if let Some((key, _)) = self.map.into_iter().next() {
            return Err(Error::config(format!(
                "config key {key:?} is not recognized for this experiment"
            )));
        }
        let mut used = self.used;
        used.sort();
        Ok(used)
    }
}

fn check_probability_list(name: &str, values: &[f64], allow_zero: bool) -> Result<()> {
    for &q in values {
        let low_ok = q > 0.0 || (allow_zero && q == 0.0);
        if !(low_ok && q < 0.5) {
            return Err(Error::config(format!(
                "{name} value {q} outside the valid crossover range"
            )));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Resolves an experiment configuration from optional file text plus
    /// command-line overrides, validating every field.
    ///
    /// # Errors
    ///
    /// Unknown or malformed keys, out-of-range values, and referenced
    /// files that do not exist or do not parse.
    pub fn build(experiment: Experiment, file_text: Option<&str>, over: &Overrides) -> Result<Self> {
        let mut map = match file_text {
            Some(text) => parse_key_values(text)?,
            None => BTreeMap::new(),
        };
        // The file may state the experiment; it must then agree with the
        // subcommand.
        if let Some(stated) = map.remove("experiment") {
            let parsed: Experiment = stated.parse()?;
            if parsed != experiment {
                return Err(Error::config(format!(
                    "config file says experiment = {parsed} but the {experiment} subcommand was invoked"
                )));
            }
        }
        let mut r = Reader::new(map);
        r.record("experiment", experiment);

        let seed = match over.seed {
            Some(s) => {
                r.take_raw("seed");
                r.record("seed", s);
                s
            }
            None => r.get("seed", 0u64)?,
        };
        let default_trials = match experiment {
            Experiment::CascadeTable | Experiment::LeakageCurve => 100,
            Experiment::FiniteKeyCurve => 50,
            Experiment::SingleRun => 1,
        };
        let trials = match over.trials {
            Some(t) => {
                r.take_raw("trials");
                r.record("trials", t);
                t
            }
            None => r.get("trials", default_trials)?,
        };
        if trials < 1 {
            return Err(Error::config("trials must be at least 1"));
        }
        // The output path steers where the file lands, not what it holds,
        // so it stays out of the canonical entries and the digest.
        let out = match &over.out {
            Some(path) => {
                r.take_raw("out");
                path.clone()
            }
            None => PathBuf::from(
                r.take_raw("out")
                    .unwrap_or_else(|| format!("{experiment}.csv")),
            ),
        };

        let mut config = ExperimentConfig {
            experiment,
            seed,
            trials,
            out,
            cascade_table: None,
            leakage_curve: None,
            finite_key_curve: None,
            single_run: None,
            canonical: Vec::new(),
        };
        match experiment {
            Experiment::CascadeTable => {
                let lengths = r.get_list("lengths", &[10_000usize, 100_000, 1_000_000])?;
                let qbers = r.get_list("qbers", &[0.01, 0.04, 0.05, 0.06])?;
                check_probability_list("qbers", &qbers, false)?;
                for &len in &lengths {
                    if len < 16 {
                        return Err(Error::config(format!("length {len} is too short")));
                    }
                }
                config.cascade_table = Some(CascadeTableConfig { lengths, qbers });
            }
            Experiment::LeakageCurve => {
                let qbers = sweep_grid(&mut r, 0.01, 0.005, 0.11)?;
                check_probability_list("qber sweep", &qbers, false)?;
                let d_over_n = r.get("d_over_n", 0.05)?;
                if !(d_over_n > 0.0 && d_over_n < 0.5) {
                    return Err(Error::config(format!(
                        "d_over_n {d_over_n} outside (0, 0.5)"
                    )));
                }
                let de_grid = r.get("de_grid", 1024usize)?;
                let cascade_length = r.get("cascade_length", 100_000usize)?;
                let ensembles = match r.take_raw("ensemble_files") {
                    Some(raw) => {
                        r.record("ensemble_files", &raw);
                        load_ensembles(&raw)?
                    }
                    None => {
                        r.record("ensemble_files", "builtin");
                        Vec::new()
                    }
                };
                config.leakage_curve = Some(LeakageCurveConfig {
                    qbers,
                    d_over_n,
                    de_grid,
                    cascade_length,
                    ensembles,
                });
            }
            Experiment::FiniteKeyCurve => {
                let qbers = r.get_list("qbers", &[0.04, 0.05, 0.06])?;
                check_probability_list("qbers", &qbers, false)?;
                let n_start = r.get("n_start", 10_000u64)?;
                let n_end = r.get("n_end", 1_000_000_000_000u64)?;
                let n_points = r.get("n_points", 33usize)?;
                if n_start < 100 || n_end <= n_start || n_points < 2 {
                    return Err(Error::config(format!(
                        "signal sweep n_start {n_start}, n_end {n_end}, n_points {n_points} is not a valid grid"
                    )));
                }
                let protocols: Vec<ProtocolTag> = r.get_list(
                    "protocols",
                    &[ProtocolTag::Perfect, ProtocolTag::Sp, ProtocolTag::Cascade],
                )?;
                let eps_total = r.get("eps_total", 1e-5)?;
                let eps_ec = r.get("eps_ec", 1e-10)?;
                if !(eps_ec > 0.0 && eps_ec < eps_total && eps_total < 1.0) {
                    return Err(Error::config(format!(
                        "failure budget eps_total {eps_total}, eps_ec {eps_ec} is not ordered 0 < eps_ec < eps_total < 1"
                    )));
                }
                let sp_finite_coeff = r.get("sp_finite_coeff", DEFAULT_SP_FINITE_COEFF)?;
                if !(sp_finite_coeff >= 0.0) {
                    return Err(Error::config(format!(
                        "sp_finite_coeff {sp_finite_coeff} must be nonnegative"
                    )));
                }
                let cascade_length = r.get("cascade_length", 100_000usize)?;
                config.finite_key_curve = Some(FiniteKeyCurveConfig {
                    qbers,
                    n_start,
                    n_end,
                    n_points,
                    protocols,
                    eps_total,
                    eps_ec,
                    sp_finite_coeff,
                    cascade_length,
                });
            }
            Experiment::SingleRun => {
                let qber = r.get("qber", 0.05)?;
                check_probability_list("qber", &[qber], true)?;
                let n = r.get("n", 10_000usize)?;
                let rate = r.get("rate", 0.6)?;
                let d_over_n = r.get("d_over_n", 0.05)?;
                if !(d_over_n > 0.0 && d_over_n < 0.5) {
                    return Err(Error::config(format!(
                        "d_over_n {d_over_n} outside (0, 0.5)"
                    )));
                }
                let protocol: ProtocolTag = r.get("protocol", ProtocolTag::Sp)?;
                if protocol == ProtocolTag::Perfect {
                    return Err(Error::config(
                        "single-run drives an implemented protocol: sp or cascade",
                    ));
                }
                let est_sample = r.get("est_sample", (n / 10).max(100))?;
                let code = match r.take_raw("code_file") {
                    Some(raw) => {
                        r.record("code_file", &raw);
                        let code = load_alist(&raw)?;
                        Some((PathBuf::from(raw), code))
                    }
                    None => {
                        r.record("code_file", "builtin");
                        None
                    }
                };
                if let Some((path, code)) = &code {
                    if code.n() != n {
                        return Err(Error::config(format!(
                            "code file {} has length {}, config says n = {n}",
                            path.display(),
                            code.n()
                        )));
                    }
                }
                config.single_run = Some(SingleRunConfig {
                    qber,
                    n,
                    rate,
                    d_over_n,
                    protocol,
                    est_sample,
                    code,
                });
            }
        }
        config.canonical = r.finish()?;
        Ok(config)
    }

    /// Effective entries in canonical (sorted) order.
    pub fn canonical_entries(&self) -> &[(String, String)] {
        &self.canonical
    }
}

/// Default finite-length leakage penalty coefficient for the syndrome
/// protocol, in leak-rate units per 1/sqrt(t). Calibrated from protocol
/// Monte-Carlo at lengths 1e4 and 2e5 (see the pool tables).
pub const DEFAULT_SP_FINITE_COEFF: f64 = 8.0;

/// Reads `qbers` or the `qber_start`/`qber_step`/`qber_end` triple.
fn sweep_grid(r: &mut Reader, start: f64, step: f64, end: f64) -> Result<Vec<f64>> {
    if let Some(raw) = r.take_raw("qbers") {
        if r.take_raw("qber_start").is_some()
            || r.take_raw("qber_step").is_some()
            || r.take_raw("qber_end").is_some()
        {
            return Err(Error::config(
                "give either qbers or the qber_start/qber_step/qber_end triple, not both",
            ));
        }
        let values = raw
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::config(format!("config key qbers: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(Error::config("config key qbers: empty list"));
        }
        let rendered: Vec<String> = values.iter().map(f64::to_string).collect();
        r.record("qbers", rendered.join(","));
        return Ok(values);
    }
    let start = r.get("qber_start", start)?;
    let step = r.get("qber_step", step)?;
    let end = r.get("qber_end", end)?;
    if !(step > 0.0 && end >= start) {
        return Err(Error::config(format!(
            "qber sweep start {start}, step {step}, end {end} is not a valid grid"
        )));
    }
    let count = ((end - start) / step).round() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Loads a comma-separated list of ensemble spec files.
fn load_ensembles(raw: &str) -> Result<Vec<(PathBuf, DegreeDistribution)>> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        let path = PathBuf::from(part.trim());
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::data(format!("ensemble file {}: {e}", path.display()))
        })?;
        let dist = parse_ensemble_spec(&text)
            .map_err(|e| Error::data(format!("ensemble file {}: {e}", path.display())))?;
        out.push((path, dist));
    }
    if out.is_empty() {
        return Err(Error::config("ensemble_files: empty list"));
    }
    Ok(out)
}

/// Reads a config file, distinguishing a missing file (data error) from
/// unreadable content.
pub fn read_config_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("config file {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_parsing() {
        let map = parse_key_values("a = 1\n# comment\n b=2 # trailing\n\n").unwrap();
        assert_eq!(map.get("a").unwrap(), "1");
        assert_eq!(map.get("b").unwrap(), "2");
        assert!(parse_key_values("a = 1\na = 2").is_err());
        assert!(parse_key_values("nonsense line").is_err());
        assert!(parse_key_values("a =").is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::build(Experiment::CascadeTable, None, &Overrides::default())
            .unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.trials, 100);
        assert_eq!(c.out, PathBuf::from("cascade-table.csv"));
        let t = c.cascade_table.unwrap();
        assert_eq!(t.lengths, vec![10_000, 100_000, 1_000_000]);
        assert_eq!(t.qbers, vec![0.01, 0.04, 0.05, 0.06]);
    }

    #[test]
    fn overrides_win() {
        let over = Overrides {
            seed: Some(7),
            trials: Some(3),
            out: Some(PathBuf::from("x.csv")),
        };
        let c = ExperimentConfig::build(
            Experiment::CascadeTable,
            Some("seed = 1\ntrials = 10\nout = y.csv"),
            &over,
        )
        .unwrap();
        assert_eq!((c.seed, c.trials), (7, 3));
        assert_eq!(c.out, PathBuf::from("x.csv"));
        // The canonical record reflects the effective values.
        let entries = c.canonical_entries();
        assert!(entries.contains(&("seed".into(), "7".into())));
        assert!(entries.contains(&("trials".into(), "3".into())));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::build(
            Experiment::CascadeTable,
            Some("lenghts = 100"),
            &Overrides::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 1);
        // Keys of other experiments are unknown here too.
        assert!(ExperimentConfig::build(
            Experiment::CascadeTable,
            Some("qber_start = 0.01"),
            &Overrides::default(),
        )
        .is_err());
    }

    #[test]
    fn stated_experiment_must_match() {
        assert!(ExperimentConfig::build(
            Experiment::CascadeTable,
            Some("experiment = cascade-table"),
            &Overrides::default(),
        )
        .is_ok());
        assert!(ExperimentConfig::build(
            Experiment::CascadeTable,
            Some("experiment = single-run"),
            &Overrides::default(),
        )
        .is_err());
    }

    #[test]
    fn sweep_grid_forms() {
        let c = ExperimentConfig::build(
            Experiment::LeakageCurve,
            Some("qber_start = 0.02\nqber_step = 0.01\nqber_end = 0.05"),
            &Overrides::default(),
        )
        .unwrap();
        let qbers = c.leakage_curve.unwrap().qbers;
        assert_eq!(qbers.len(), 4);
        assert!((qbers[3] - 0.05).abs() < 1e-12);
        let c2 = ExperimentConfig::build(
            Experiment::LeakageCurve,
            Some("qbers = 0.03, 0.05"),
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(c2.leakage_curve.unwrap().qbers, vec![0.03, 0.05]);
        assert!(ExperimentConfig::build(
            Experiment::LeakageCurve,
            Some("qbers = 0.03\nqber_start = 0.01"),
            &Overrides::default(),
        )
        .is_err());
    }

    #[test]
    fn single_run_validation() {
        let c = ExperimentConfig::build(
            Experiment::SingleRun,
            Some("qber = 0\nprotocol = cascade"),
            &Overrides::default(),
        )
        .unwrap();
        let s = c.single_run.unwrap();
        assert_eq!(s.qber, 0.0);
        assert_eq!(s.protocol, ProtocolTag::Cascade);
        assert!(ExperimentConfig::build(
            Experiment::SingleRun,
            Some("protocol = perfect"),
            &Overrides::default(),
        )
        .is_err());
        let err = ExperimentConfig::build(
            Experiment::SingleRun,
            Some("code_file = /no/such/file.alist"),
            &Overrides::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn finite_key_budget_checks() {
        assert!(ExperimentConfig::build(
            Experiment::FiniteKeyCurve,
            Some("eps_total = 1e-10\neps_ec = 1e-5"),
            &Overrides::default(),
        )
        .is_err());
        let c = ExperimentConfig::build(
            Experiment::FiniteKeyCurve,
            Some("protocols = perfect,sp"),
            &Overrides::default(),
        )
        .unwrap();
        let f = c.finite_key_curve.unwrap();
        assert_eq!(f.protocols, vec![ProtocolTag::Perfect, ProtocolTag::Sp]);
        assert_eq!(f.n_points, 33);
    }

    #[test]
    fn canonical_entries_are_sorted_and_complete() {
        let c = ExperimentConfig::build(Experiment::SingleRun, None, &Overrides::default())
            .unwrap();
        let entries = c.canonical_entries();
        assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        for key in ["experiment", "seed", "trials", "qber", "n", "rate"] {
            assert!(
                entries.iter().any(|(k, _)| k == key),
                "missing canonical entry {key}"
            );
        }
        // The destination is not part of the experiment identity.
        assert!(!entries.iter().any(|(k, _)| k == "out"));
    }
}
