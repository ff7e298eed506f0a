use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a row's measured value is compared to its theoretical value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `measured <= theory * (1 + rel) + abs`.
    AtMost,
    /// `measured >= theory * (1 - rel) - abs`.
    AtLeast,
}

/// One verified inequality with its numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub anchor: String,
    pub theory: f64,
    pub measured: f64,
    /// Distance to the tolerance-adjusted threshold; negative when violated.
    pub margin: f64,
    pub pass: bool,
    /// Sample count behind `measured`.
    pub samples: usize,
}

impl CheckRow {
    #[allow(clippy::too_many_arguments)]
    pub fn compare(
        name: &str,
        anchor: &str,
        comparison: Comparison,
        theory: f64,
        measured: f64,
        rel: f64,
        abs: f64,
        samples: usize,
    ) -> Self {
        let margin = match comparison {
            Comparison::AtMost => theory * (1.0 + rel) + abs - measured,
            Comparison::AtLeast => measured - (theory * (1.0 - rel) - abs),
        };
        CheckRow {
            name: name.into(),
            anchor: anchor.into(),
            theory,
            measured,
            margin,
            pass: margin >= 0.0 && measured.is_finite(),
            samples,
        }
    }

    /// A row whose pass flag was decided elsewhere.
    #[allow(clippy::too_many_arguments)]
    pub fn with_verdict(name: &str, anchor: &str, theory: f64, measured: f64, margin: f64, pass: bool, samples: usize) -> Self {
        CheckRow {
            name: name.into(),
            anchor: anchor.into(),
            theory,
            measured,
            margin,
            pass,
            samples,
        }
    }
}

/// Rows sorted by name; the verdict is the conjunction of their pass flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub scenario: String,
    pub rows: Vec<CheckRow>,
    pub pass: bool,
}

impl CertificationReport {
    pub fn new(scenario: impl Into<String>, mut rows: Vec<CheckRow>) -> Self {
        rows.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = rows.iter().all(|r| r.pass);
        CertificationReport {
            scenario: scenario.into(),
            rows,
            pass,
        }
    }

    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Distinct anchors, sorted.
    pub fn anchors(&self) -> Vec<&str> {
        let mut a: Vec<&str> = self.rows.iter().map(|r| r.anchor.as_str()).collect();
        a.sort_unstable();
        a.dedup();
        a
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(format!("json output: {e}")))
    }

    /// Fixed-width table with columns name, anchor, theory, measured, margin, pass.
    pub fn to_table(&self) -> String {
        let wn = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let wa = self.rows.iter().map(|r| r.anchor.len()).max().unwrap_or(6).max(6);
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(
            s,
            "{:<wn$}  {:<wa$}  {:>14}  {:>14}  {:>11}  pass",
            "name", "anchor", "theory", "measured", "margin"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<wn$}  {:<wa$}  {:>14.8e}  {:>14.8e}  {:>11.3e}  {}",
                r.name,
                r.anchor,
                r.theory,
                r.measured,
                r.margin,
                if r.pass { "yes" } else { "NO" }
            );
        }
        let _ = writeln!(s, "verdict: {}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}
