//! Output records and their CSV/JSON encodings.
//!
//! Numeric samples are serialized exactly as integer numerator plus scale;
//! the `approx` column is a labeled convenience and never feeds back into
//! anything. Headers and key names are fixed so identical invocations
//! produce identical bytes.

use inbl::experiments::Histogram;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct SingleRecord {
    pub deficient_hat: String,
    pub clocks_used: u64,
    pub witness_numerator: String,
    pub witness_scale: u32,
    /// `2^-r` rendered as text; the witness is always a product string.
    pub witness_magnitude: String,
}

impl SingleRecord {
    pub fn to_csv(&self) -> String {
        format!(
            "deficient_hat,clocks_used,witness_numerator,witness_scale,witness_magnitude\n{},{},{},{},{}\n",
            self.deficient_hat,
            self.clocks_used,
            self.witness_numerator,
            self.witness_scale,
            self.witness_magnitude
        )
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DoubleRecord {
    Decided {
        hat1_missing: u64,
        hat2_missing: u64,
        clocks_used: u64,
    },
    Undecided {
        clocks_exhausted: u64,
    },
}

impl DoubleRecord {
    pub fn to_csv(&self) -> String {
        let header = "outcome,hat1_missing,hat2_missing,clocks_used\n";
        match self {
            DoubleRecord::Decided {
                hat1_missing,
                hat2_missing,
                clocks_used,
            } => format!("{header}decided,{hat1_missing},{hat2_missing},{clocks_used}\n"),
            DoubleRecord::Undecided { clocks_exhausted } => {
                format!("{header}undecided,,,{clocks_exhausted}\n")
            }
        }
    }
}

/// Analytic bucket probability for equal zero-bit counts.
pub fn analytic_fraction(clocks: u64) -> f64 {
    if clocks > 1100 {
        0.0
    } else {
        2f64.powi(-(clocks as i32))
    }
}

pub fn histogram_csv(histogram: &Histogram) -> String {
    let mut out = String::from("clocks,count,fraction,analytic\n");
    for (clocks, count) in histogram.buckets() {
        out.push_str(&format!(
            "{clocks},{count},{},{}\n",
            histogram.fraction(clocks),
            analytic_fraction(clocks)
        ));
    }
    out
}

pub struct TraceRow {
    pub clock: u64,
    pub numerator: String,
    pub scale: u32,
    pub approx: f64,
    pub distorted: f64,
}

pub fn trace_csv(rows: &[TraceRow], distort: bool) -> String {
    let mut out = String::from(if distort {
        "clock,numerator,scale,approx,distorted\n"
    } else {
        "clock,numerator,scale,approx\n"
    });
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}",
            row.clock, row.numerator, row.scale, row.approx
        ));
        if distort {
            out.push_str(&format!(",{}", row.distorted));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn new(suite: impl Into<String>, seed: u64, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            suite: suite.into(),
            seed,
            checks,
            pass,
        }
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}
