//! Experiment reports and their JSON and CSV encodings.
//!
//! JSON layout:
//!
//! ```text
//! {
//!   "config": { ...echo of the experiment configuration... },
//!   "checks": [{"name", "pass", "worst_dev", "detail"}],
//!   "counterexamples": [{"check", "seed", "dim", "violation"}],
//!   "master_seed": <u64>,
//!   "duration_ms": <u64 or null>
//! }
//! ```
//!
//! Each check's `detail` holds its tolerance; the first check of a campaign
//! also holds the campaign's summary statistics under `"summary"`.
//!
//! Floats are written in shortest round-trip form, so parsing a report and
//! writing it again gives the same bytes. `duration_ms` is null unless timing
//! was requested, which keeps reruns byte-identical.

use std::str::FromStr;

use clap::ValueEnum;
use collapse_lab_core::campaign::Counterexample;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub worst_dev: f64,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub check: String,
    pub seed: u64,
    pub dim: usize,
    pub violation: f64,
}

impl CounterexampleRow {
    pub fn from_campaign(check: &str, c: &Counterexample) -> Self {
        CounterexampleRow {
            check: check.to_string(),
            seed: c.seed,
            dim: c.dim,
            violation: c.violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub checks: Vec<CheckRow>,
    pub counterexamples: Vec<CounterexampleRow>,
    pub master_seed: u64,
    pub duration_ms: Option<u64>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn parse(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, false)
    }
}

/// Serializes a report. CSV has a header and one row per check, with the
/// detail object as compact JSON in the last column.
pub fn emit_report(report: &ExperimentReport, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| CliError::io("<report>", e))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::io("<report>", e);
            w.write_record(["name", "pass", "worst_dev", "detail"]).map_err(io)?;
            for c in &report.checks {
                let detail = serde_json::to_string(&c.detail).map_err(|e| CliError::io("<report>", e))?;
                let worst = serde_json::to_string(&c.worst_dev).map_err(|e| CliError::io("<report>", e))?;
                w.write_record([c.name.as_str(), if c.pass { "true" } else { "false" }, &worst, &detail])
                    .map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::io("<report>", e.error()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;
    use serde_json::json;

    fn sample() -> ExperimentReport {
        ExperimentReport {
            config: ExperimentConfig::new(Command::Measure),
            checks: vec![
                CheckRow {
                    name: "a".into(),
                    pass: true,
                    worst_dev: 1.0 / 3.0,
                    detail: json!({"tolerance": 1e-10, "values": [0.1, 2.5e-17]}),
                },
                CheckRow {
                    name: "b, with comma".into(),
                    pass: false,
                    worst_dev: 0.0,
                    detail: json!({}),
                },
            ],
            counterexamples: vec![],
            master_seed: 42,
            duration_ms: None,
        }
    }

    #[test]
    fn json_is_deterministic_and_round_trips() {
        let r = sample();
        let a = emit_report(&r, Format::Json).unwrap();
        assert_eq!(a, emit_report(&r, Format::Json).unwrap());
        let text = String::from_utf8(a.clone()).unwrap();
        assert!(text.contains("\"counterexamples\": []"));
        assert!(text.contains("\"duration_ms\": null"));
        let back = ExperimentReport::parse(&text).unwrap();
        assert_eq!(emit_report(&back, Format::Json).unwrap(), a);
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let out = String::from_utf8(emit_report(&sample(), Format::Csv).unwrap()).unwrap();
        let mut rdr = csv::Reader::from_reader(out.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[1][0], "b, with comma");
        assert_eq!(&rows[0][2], "0.3333333333333333");
        let detail: Value = serde_json::from_str(&rows[0][3]).unwrap();
        assert_eq!(detail["tolerance"], json!(1e-10));
    }
}
