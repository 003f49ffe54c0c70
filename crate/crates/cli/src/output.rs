//! Run reports, float formatting and file output.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fields that legitimately differ between otherwise identical runs.
pub const VOLATILE_FIELDS: [&str; 2] = ["started", "elapsed_s"];

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    /// RFC 3339 start time.
    pub started: String,
    pub elapsed_s: f64,
    /// Command-specific quantities (classification, lattice finding, ...).
    pub summary: Value,
    /// One entry per check, each carrying its tolerance.
    pub results: Vec<Value>,
    /// Output files written next to the report, relative to the output
    /// directory.
    pub files: Vec<String>,
    /// All asserted checks passed.
    pub pass: bool,
}

/// `x` rounded to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Human-readable 15-significant-digit form.
pub fn fmt15(x: f64) -> String {
    format!("{x:.14e}")
}

/// Rounds every number in `v` to 15 significant digits.
pub fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round15(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_numbers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_numbers(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Value, CliError> {
    serde_json::to_value(value)
        .map(round_numbers)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("Value always serializes");
    s.push('\n');
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn report_file_name(command: &str) -> String {
    format!("run_{command}.json")
}

/// Copy of a report value without the volatile fields, for comparisons.
pub fn strip_volatile(mut v: Value) -> Value {
    if let Value::Object(o) = &mut v {
        for k in VOLATILE_FIELDS {
            o.remove(k);
        }
    }
    v
}
