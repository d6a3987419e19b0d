//! Versioned JSON reports and CSV side tables.
//!
//! Reports are deterministic: maps are ordered, there are no timestamps,
//! and every float is printed in shortest round-trip form.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::scenario::{Command, FSpec, SurfaceSpec};

pub const SCHEMA: &str = "relgeo-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Upper limit; scaled by `--tolerance-scale`.
    Max,
    /// Lower floor; not scaled.
    Min,
}

/// Tolerances a command uses, after overrides and scaling.
#[derive(Clone, Debug, Serialize)]
pub struct Ledger {
    pub scale: f64,
    pub entries: BTreeMap<String, LedgerEntry>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LedgerEntry {
    pub bound: Bound,
    pub value: f64,
    pub overridden: bool,
}

impl Ledger {
    /// `known` lists `(name, bound, default)`; overrides naming anything else are schema errors.
    pub fn new(
        known: &[(&str, Bound, f64)],
        overrides: &BTreeMap<String, f64>,
        scale: f64,
    ) -> Result<Ledger, CliError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(CliError::Schema(format!(
                "tolerance scale must be positive, got {scale}"
            )));
        }
        if let Some(name) = overrides
            .keys()
            .find(|k| !known.iter().any(|(n, _, _)| n == k))
        {
            let names: Vec<&str> = known.iter().map(|(n, _, _)| *n).collect();
            return Err(CliError::Schema(format!(
                "unknown tolerance `{name}`; this command uses {}",
                names.join(", ")
            )));
        }
        let mut entries = BTreeMap::new();
        for &(name, bound, default) in known {
            let given = overrides.get(name).copied();
            if let Some(x) = given {
                if !(x.is_finite() && x >= 0.0) {
                    return Err(CliError::Schema(format!(
                        "tolerance `{name}` must be finite and nonnegative"
                    )));
                }
            }
            let base = given.unwrap_or(default);
            let value = match bound {
                Bound::Max => base * scale,
                Bound::Min => base,
            };
            entries.insert(
                name.to_string(),
                LedgerEntry {
                    bound,
                    value,
                    overridden: given.is_some(),
                },
            );
        }
        Ok(Ledger { scale, entries })
    }

    pub fn check(&self, name: &str, value: f64) -> Check {
        let e = self.entries[name];
        let pass = match e.bound {
            Bound::Max => value <= e.value,
            Bound::Min => value >= e.value,
        };
        Check {
            name: name.to_string(),
            value,
            bound: Some(e.bound),
            limit: Some(e.value),
            pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Non-finite values serialize as `null` and never pass.
    pub value: f64,
    pub bound: Option<Bound>,
    pub limit: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// A yes/no condition without a numeric limit.
    pub fn flag(name: &str, pass: bool) -> Check {
        Check {
            name: name.to_string(),
            value: if pass { 1.0 } else { 0.0 },
            bound: None,
            limit: None,
            pass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Serialize)]
pub struct Report<R: Serialize> {
    pub schema: &'static str,
    pub command: Command,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<FSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    pub tolerances: Ledger,
    pub checks: Vec<Check>,
    pub results: R,
}

impl<R: Serialize> Report<R> {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types serialize");
        s.push('\n');
        s
    }
}

pub fn status_of(checks: &[Check]) -> Status {
    if checks.iter().all(|c| c.pass) {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Column-named rows of floats for external plotting.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
        w.write_record(&self.header).map_err(|e| io(e.into()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| x.to_string()))
                .map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_scales_upper_bounds_only() {
        let known = [("a", Bound::Max, 1e-4), ("b", Bound::Min, 0.1)];
        let mut over = BTreeMap::new();
        over.insert("a".to_string(), 1e-6);
        let l = Ledger::new(&known, &over, 10.0).unwrap();
        assert!((l.entries["a"].value - 1e-5).abs() < 1e-20);
        assert!(l.entries["a"].overridden);
        assert_eq!(l.entries["b"].value, 0.1);
        assert!(l.check("a", 0.9e-5).pass && !l.check("a", 2e-5).pass);
        assert!(l.check("b", 0.2).pass && !l.check("b", 0.05).pass);
        assert!(!l.check("a", f64::NAN).pass);
    }

    #[test]
    fn ledger_rejects_bad_input() {
        let known = [("a", Bound::Max, 1e-4)];
        let mut over = BTreeMap::new();
        over.insert("zzz".to_string(), 1.0);
        assert!(matches!(
            Ledger::new(&known, &over, 1.0),
            Err(CliError::Schema(_))
        ));
        assert!(Ledger::new(&known, &BTreeMap::new(), 0.0).is_err());
        assert!(Ledger::new(&known, &BTreeMap::new(), f64::NAN).is_err());
    }
}
