//! Machine-readable run report and CSV tables.

use serde::Serialize;

use crate::numfmt::{sig17, Num};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameSummary {
    pub dim: usize,
    pub eigenvalues: Vec<[Num; 2]>,
    pub min_gap: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct Coefficient {
    pub k: usize,
    pub re: Num,
    pub im: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateSeries {
    pub state: usize,
    pub eigenvalue_corrections: Vec<Coefficient>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One measured quantity against its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    pub label: String,
    /// `None` when the quantity could not be measured; see `note`.
    pub value: Option<Num>,
    pub relation: Relation,
    pub threshold: Num,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Measurement {
    pub fn new(label: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
        };
        Measurement {
            label: label.into(),
            value: Some(Num(value)),
            relation,
            threshold: Num(threshold),
            passed,
            note: None,
        }
    }

    pub fn unmeasured(label: impl Into<String>, relation: Relation, threshold: f64, passed: bool, note: impl Into<String>) -> Self {
        Measurement {
            label: label.into(),
            value: None,
            relation,
            threshold: Num(threshold),
            passed,
            note: Some(note.into()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
}

impl Check {
    pub fn new(name: &'static str, measurements: Vec<Measurement>) -> Self {
        Check {
            name,
            passed: measurements.iter().all(|m| m.passed),
            measurements,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub model: String,
    pub order: usize,
    pub gauge: String,
    pub frame: FrameSummary,
    pub series: Vec<StateSeries>,
    pub verification: Vec<Check>,
    pub verdict: Verdict,
}

impl Report {
    /// Pass only if every enabled check passed.
    pub fn verdict_of(checks: &[Check]) -> Verdict {
        if checks.iter().all(|c| c.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.verification.iter().find(|c| c.name == name)
    }

    /// `n,k,re,im` rows for every state and order.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("n,k,re,im\n");
        for s in &self.series {
            for c in &s.eigenvalue_corrections {
                out.push_str(&format!("{},{},{},{}\n", s.state, c.k, sig17(c.re.0), sig17(c.im.0)));
            }
        }
        out
    }
}

/// One row of the sweep table.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub q: f64,
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("q,n,re,im,residual\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            sig17(r.q),
            r.n,
            sig17(r.re),
            sig17(r.im),
            sig17(r.residual)
        ));
    }
    out
}
