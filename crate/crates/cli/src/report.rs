//! Report envelope, named diagnostics, exit codes and CSV emission.

use std::io::Write;

use serde::Serialize;
use trapwave::{Diagnostics, Error};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code for a numerical-tolerance failure.
pub const EXIT_TOLERANCE: u8 = 1;
/// Exit code for an invalid configuration.
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub name: String,
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Entry {
    pub fn error(name: &str, message: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            flagged: true,
            message: Some(message.into()),
            value: None,
            threshold: None,
        }
    }

    /// A measured value held to `value <= threshold`.
    pub fn measured(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            flagged: !(value <= threshold),
            message: None,
            value: Some(value),
            threshold: Some(threshold),
        }
    }

    /// A reported value with no threshold.
    pub fn info(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            flagged: false,
            message: None,
            value: Some(value),
            threshold: None,
        }
    }
}

pub fn entries(d: &Diagnostics) -> Vec<Entry> {
    d.0.iter().map(|d| Entry::measured(d.name, d.value, d.threshold)).collect()
}

/// Keeps the worst value per diagnostic name, in first-seen order.
pub fn merge_worst(into: &mut Vec<Entry>, more: Vec<Entry>) {
    for e in more {
        match into.iter_mut().find(|x| x.name == e.name && x.threshold == e.threshold) {
            Some(x) => {
                if let (Some(a), Some(b)) = (x.value, e.value) {
                    if !(a >= b) {
                        *x = e;
                    }
                }
            }
            None => into.push(e),
        }
    }
}

/// A run that could not finish normally.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub diagnostics: Vec<Entry>,
}

impl Failure {
    pub fn config(diagnostics: Vec<Entry>) -> Self {
        Self {
            code: EXIT_CONFIG,
            diagnostics,
        }
    }

    pub fn io(name: &str, err: impl std::fmt::Display) -> Self {
        Self::config(vec![Entry::error(name, err.to_string())])
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, name) = match &e {
            Error::KappaNonPositive(_) => (EXIT_CONFIG, "kappa_nonpositive"),
            Error::ZeroMass => (EXIT_CONFIG, "zero_mass"),
            Error::DimensionMismatch { .. } => (EXIT_CONFIG, "dimension_mismatch"),
            Error::InvalidArgument(_) => (EXIT_CONFIG, "invalid_argument"),
            Error::PrimeCondition(c) if c.contains('.') => (EXIT_CONFIG, "hprime_orthogonality"),
            Error::PrimeCondition(_) => (EXIT_CONFIG, "hprime_norm_balance"),
            Error::OddMode(_) => (EXIT_CONFIG, "odd_mode"),
            Error::Hypothesis(_) => (EXIT_CONFIG, "stability_hypothesis"),
            Error::EigenNoConvergence(_) => (EXIT_TOLERANCE, "eigen_no_convergence"),
            Error::ToleranceNotMet { .. } => (EXIT_TOLERANCE, "tolerance_not_met"),
            Error::NonMonotone(_) => (EXIT_TOLERANCE, "non_monotone"),
            Error::PhaseCalibration(_) => (EXIT_TOLERANCE, "phase_calibration"),
        };
        Self {
            code,
            diagnostics: vec![Entry::error(name, e.to_string())],
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub config_echo: serde_json::Value,
    pub results: serde_json::Value,
    pub diagnostics: Vec<Entry>,
    pub version: String,
}

impl Envelope {
    pub fn new(config_echo: serde_json::Value, results: serde_json::Value, diagnostics: Vec<Entry>) -> Self {
        Self {
            config_echo,
            results,
            diagnostics,
            version: VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}

/// Exit code implied by a finished run's diagnostics.
pub fn exit_code(diagnostics: &[Entry]) -> u8 {
    if diagnostics.iter().any(|d| d.flagged) {
        EXIT_TOLERANCE
    } else {
        0
    }
}

/// Float formatting for CSV cells: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV table; rows are checked for finiteness as they are added.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub nonfinite: usize,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
            nonfinite: 0,
        }
    }

    /// Appends numeric cells followed by any text cells.
    pub fn push(&mut self, numbers: &[f64], text: &[&str]) {
        self.nonfinite += numbers.iter().filter(|v| !v.is_finite()).count();
        let mut row: Vec<String> = numbers.iter().map(|v| fmt_f64(*v)).collect();
        row.extend(text.iter().map(|s| s.to_string()));
        self.rows.push(row);
    }

    pub fn write(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn finiteness(&self) -> Entry {
        Entry::measured("nonfinite_cells", self.nonfinite as f64, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        let v = 1.0 / 3.0;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn errors_map_to_named_exit_codes() {
        let f = Failure::from(Error::KappaNonPositive(-1.0));
        assert_eq!((f.code, f.diagnostics[0].name.as_str()), (2, "kappa_nonpositive"));
        let f = Failure::from(Error::PrimeCondition("a1 . b1 = 0"));
        assert_eq!(f.diagnostics[0].name, "hprime_orthogonality");
        let f = Failure::from(Error::PrimeCondition("|a1|^2 = lambda |b1|^2"));
        assert_eq!(f.diagnostics[0].name, "hprime_norm_balance");
        let f = Failure::from(Error::ToleranceNotMet {
            achieved: 1.0,
            tolerance: 0.1,
            required_dt: 0.01,
        });
        assert_eq!(f.code, 1);
    }

    #[test]
    fn flagged_entries_set_exit_code() {
        assert_eq!(exit_code(&[Entry::measured("a", 1.0, 2.0)]), 0);
        assert_eq!(exit_code(&[Entry::measured("a", f64::NAN, 2.0)]), 1);
        assert_eq!(exit_code(&[Entry::info("a", 5.0)]), 0);
    }

    #[test]
    fn merge_keeps_worst() {
        let mut v = vec![Entry::measured("loss", 1e-12, 1e-9)];
        merge_worst(&mut v, vec![Entry::measured("loss", 1e-6, 1e-9), Entry::info("other", 1.0)]);
        assert_eq!(v.len(), 2);
        assert!(v[0].flagged);
    }

    #[test]
    fn table_counts_nonfinite_cells() {
        let mut t = Table::new(vec!["a".into(), "b".into(), "status".into()]);
        t.push(&[1.0, f64::INFINITY], &["ok"]);
        assert!(t.finiteness().flagged);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("a,b,status\n1.0000000000000000e0,inf,ok"));
    }
}
