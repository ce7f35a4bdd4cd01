//! Experiment reports: tabular data, fitted slopes, and pass/fail
//! verdicts, written as CSV files plus one `summary.json`.
//!
//! Output is byte-deterministic: floats are printed with a fixed format,
//! JSON maps serialize with sorted keys, and nothing time- or
//! machine-dependent is recorded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fit::SlopeFit;

/// One table cell. Floats print as `{:.12e}`, so repeated runs agree to
/// the byte.
#[derive(Debug, Clone)]
pub enum CellValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<i64> for CellValue {
    fn from(v: i64) -> Self {
        CellValue::Int(v)
    }
}

impl From<i32> for CellValue {
    fn from(v: i32) -> Self {
        CellValue::Int(v as i64)
    }
}

impl From<u32> for CellValue {
    fn from(v: u32) -> Self {
        CellValue::Int(v as i64)
    }
}

impl From<f64> for CellValue {
    fn from(v: f64) -> Self {
        CellValue::Float(v)
    }
}

impl From<&str> for CellValue {
    fn from(v: &str) -> Self {
        CellValue::Text(v.to_string())
    }
}

impl std::fmt::Display for CellValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellValue::Int(v) => write!(f, "{v}"),
            CellValue::Float(v) => {
                if v.is_nan() {
                    write!(f, "nan")
                } else if v.is_infinite() {
                    write!(f, "{}", if *v > 0.0 { "inf" } else { "-inf" })
                } else {
                    write!(f, "{v:.12e}")
                }
            }
            CellValue::Text(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<CellValue>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<CellValue>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{cell}");
            }
            out.push('\n');
        }
        out
    }
}

/// One acceptance decision with the number it was made on.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    /// Human-readable bound, e.g. `"<= 1e-10"` or `"in [1.8, 2.2]"`.
    pub threshold: String,
    pub detail: String,
}

impl Verdict {
    /// Measured value must not exceed `bound`.
    pub fn le(name: &str, measured: f64, bound: f64, detail: &str) -> Self {
        Verdict {
            name: name.to_string(),
            pass: measured.is_finite() && measured <= bound,
            measured,
            threshold: format!("<= {bound:e}"),
            detail: detail.to_string(),
        }
    }

    /// Measured value must lie in `[lo, hi]`.
    pub fn in_range(name: &str, measured: f64, lo: f64, hi: f64, detail: &str) -> Self {
        Verdict {
            name: name.to_string(),
            pass: measured.is_finite() && measured >= lo && measured <= hi,
            measured,
            threshold: format!("in [{lo}, {hi}]"),
            detail: detail.to_string(),
        }
    }

    /// Measured value must be at least `bound`.
    pub fn ge(name: &str, measured: f64, bound: f64, detail: &str) -> Self {
        Verdict {
            name: name.to_string(),
            pass: measured.is_finite() && measured >= bound,
            measured,
            threshold: format!(">= {bound:e}"),
            detail: detail.to_string(),
        }
    }

    /// Boolean condition; `measured` carries the supporting number.
    pub fn flag(name: &str, pass: bool, measured: f64, condition: &str, detail: &str) -> Self {
        Verdict {
            name: name.to_string(),
            pass,
            measured,
            threshold: condition.to_string(),
            detail: detail.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeRecord {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

impl SlopeRecord {
    pub fn new(name: &str, fit: &SlopeFit) -> Self {
        SlopeRecord {
            name: name.to_string(),
            slope: fit.slope,
            intercept: fit.intercept,
            residual: fit.residual,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub id: String,
    pub title: String,
    pub config_echo: Value,
    pub provenance: Value,
    pub tables: Vec<Table>,
    pub slopes: Vec<SlopeRecord>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn new(id: &str, title: &str) -> Self {
        ExperimentReport {
            id: id.to_string(),
            title: title.to_string(),
            config_echo: Value::Null,
            provenance: Value::Null,
            tables: Vec::new(),
            slopes: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// JSON numbers cannot be non-finite; encode those as strings.
    fn json_num(v: f64) -> Value {
        if v.is_finite() {
            json!(v)
        } else if v.is_nan() {
            json!("nan")
        } else if v > 0.0 {
            json!("inf")
        } else {
            json!("-inf")
        }
    }

    pub fn summary_json(&self) -> Value {
        let slopes: Vec<Value> = self
            .slopes
            .iter()
            .map(|s| {
                json!({
                    "name": s.name,
                    "slope": Self::json_num(s.slope),
                    "intercept": Self::json_num(s.intercept),
                    "residual": Self::json_num(s.residual),
                })
            })
            .collect();
        let verdicts: Vec<Value> = self
            .verdicts
            .iter()
            .map(|v| {
                json!({
                    "name": v.name,
                    "pass": v.pass,
                    "measured": Self::json_num(v.measured),
                    "threshold": v.threshold,
                    "detail": v.detail,
                })
            })
            .collect();
        json!({
            "id": self.id,
            "title": self.title,
            "passed": self.passed(),
            "config": self.config_echo,
            "provenance": self.provenance,
            "tables": self.tables.iter().map(|t| format!("table_{}.csv", t.name)).collect::<Vec<_>>(),
            "slopes": slopes,
            "verdicts": verdicts,
        })
    }

    /// Write `dir/<id>/table_<name>.csv` for each table plus
    /// `dir/<id>/summary.json`; returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let base = dir.join(&self.id);
        std::fs::create_dir_all(&base)?;
        let mut written = Vec::new();
        for table in &self.tables {
            let path = base.join(format!("table_{}.csv", table.name));
            std::fs::write(&path, table.to_csv())?;
            written.push(path);
        }
        let path = base.join("summary.json");
        let mut text = serde_json::to_string_pretty(&self.summary_json())
            .map_err(Error::Json)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        written.push(path);
        Ok(written)
    }
}
