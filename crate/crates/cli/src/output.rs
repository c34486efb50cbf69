//! Deterministic serialization: every float is printed with 17 significant
//! digits, JSON keys are sorted, CSV uses `,` and LF.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Fixed-width scientific notation: one leading digit and sixteen decimals.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Rewrites every floating-point number in `v` to the fixed format;
/// non-finite values become `null`. Integers are left alone.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                let x: f64 = text.parse().expect("serde_json emits parseable numbers");
                float_value(x)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

fn float_value(x: f64) -> Value {
    // Adding zero folds −0 into +0.
    let x = x + 0.0;
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt_float(x)).expect("fixed float format is valid JSON"))
    } else {
        Value::Null
    }
}

/// Serializes `value` and canonicalizes its numbers.
pub fn to_canonical<T: Serialize>(value: &T) -> Result<Value> {
    Ok(canonical(serde_json::to_value(value)?))
}

/// What a command produced.
pub enum Payload {
    /// A table with fixed columns; rows are objects keyed by column.
    Table {
        columns: Vec<&'static str>,
        rows: Vec<Value>,
        /// Extra JSON-only fields next to `rows`.
        extra: Map<String, Value>,
    },
    /// A nested report. The CSV view is flattened to `quantity,value` rows
    /// and may omit redundant fields of the JSON view.
    Report { json: Value, csv: Value },
}

pub struct Output {
    pub command: &'static str,
    pub config: Map<String, Value>,
    pub payload: Payload,
    pub warnings: Vec<String>,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
        }
    }

    fn json(&self) -> Result<String> {
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.into()));
        top.insert(
            "config".into(),
            canonical(Value::Object(self.config.clone())),
        );
        match &self.payload {
            Payload::Table { rows, extra, .. } => {
                top.insert("rows".into(), Value::Array(rows.clone()));
                for (k, v) in extra {
                    top.insert(k.clone(), v.clone());
                }
            }
            Payload::Report { json, .. } => {
                top.insert("result".into(), json.clone());
            }
        }
        top.insert(
            "warnings".into(),
            Value::Array(self.warnings.iter().cloned().map(Value::String).collect()),
        );
        let mut s = serde_json::to_string_pretty(&Value::Object(top))?;
        s.push('\n');
        Ok(s)
    }

    fn csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        match &self.payload {
            Payload::Table { columns, rows, .. } => {
                w.write_record(columns)?;
                for row in rows {
                    w.write_record(columns.iter().map(|c| cell(row.get(*c))))?;
                }
            }
            Payload::Report { csv, .. } => {
                w.write_record(["quantity", "value"])?;
                let mut flat = Vec::new();
                flatten("", csv, &mut flat);
                for (k, v) in flat {
                    w.write_record([k, v])?;
                }
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        other => out.push((prefix.to_string(), cell(Some(other)))),
    }
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
