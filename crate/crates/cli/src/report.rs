use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use msl_core::algebra::{format_rational, rational_to_f64, Rational};
use msl_core::Error;

/// Why a run did not succeed; maps onto exit codes 1 and 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_certificate_failure() {
            Failure::Violation(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// What a command produced, before formatting.
pub struct Outcome {
    pub result: Value,
    pub text: String,
    /// Primary table, decimals only.
    pub csv: String,
    /// Set when a checked invariant failed; artifacts are still written.
    pub violation: Option<String>,
}

/// Decimal with 15 significant digits.
pub fn decimal15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let prec = (14 - exp) as usize;
        format!("{x:.prec$}")
    } else {
        format!("{x:.14e}")
    }
}

/// `"p/q (decimal)"` for people.
pub fn rational_text(r: &Rational) -> String {
    format!("{} ({})", format_rational(r), decimal15(rational_to_f64(r)))
}

pub fn rational_json(r: &Rational) -> Value {
    json!({ "exact": format_rational(r), "decimal": decimal15(rational_to_f64(r)) })
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Failure::Usage(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Usage(e.to_string()))
}

pub fn write_artifacts(dir: &Path, command: &str, report: &Value, csv: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(report).map_err(|e| Failure::Usage(e.to_string()))?;
    fs::write(dir.join("report.json"), text + "\n")?;
    fs::write(dir.join(format!("{command}.csv")), csv)?;
    Ok(())
}
