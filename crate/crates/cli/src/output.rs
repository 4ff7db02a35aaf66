//! JSON and CSV emission. Floats are rounded to 15 significant digits;
//! non-finite floats have no JSON form and come out as null.

use serde_json::{Map, Value};

/// A command result. `table` names an array-of-objects field that CSV mode
/// prints as rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub value: Value,
    pub table: Option<&'static str>,
}

impl Report {
    pub fn new(value: Value) -> Self {
        Report { value, table: None }
    }

    pub fn with_table(value: Value, table: &'static str) -> Self {
        Report { value, table: Some(table) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.14e}").parse().unwrap_or(v)
}

/// Rounds every float in place. Integers are left alone.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = n.as_f64().map(round_sig).unwrap_or(f64::NAN);
            *v = serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null);
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(m) => m.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn render(report: &Report, format: Format) -> String {
    let mut value = report.value.clone();
    round_value(&mut value);
    match format {
        Format::Json => format!("{value}\n"),
        Format::Csv => match report.table.and_then(|t| value.get(t)).and_then(Value::as_array) {
            Some(rows) => table_csv(rows),
            None => key_value_csv(&value),
        },
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_rows(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        // Writing to a Vec cannot fail.
        w.write_record(&r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

fn table_csv(rows: &[Value]) -> String {
    let mut header: Vec<String> = Vec::new();
    for r in rows {
        if let Some(m) = r.as_object() {
            for k in m.keys() {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
    }
    let mut out = vec![header.clone()];
    for r in rows {
        out.push(header.iter().map(|k| r.get(k).map(cell).unwrap_or_default()).collect());
    }
    write_rows(out)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => flatten_map(prefix, m, out),
        other => out.push(vec![prefix.to_string(), cell(other)]),
    }
}

fn flatten_map(prefix: &str, m: &Map<String, Value>, out: &mut Vec<Vec<String>>) {
    for (k, v) in m {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        flatten(&key, v, out);
    }
}

fn key_value_csv(v: &Value) -> String {
    let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
    flatten("", v, &mut rows);
    write_rows(rows)
}
