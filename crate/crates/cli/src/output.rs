//! Rendering records as JSON lines, CSV or an aligned table.

use std::io::{self, Write};

use serde_json::Value;

use crate::spec::Format;

/// Summary columns for verification records; other records use every top-level key.
const REPORT_COLUMNS: [&str; 9] = ["id", "params", "depth", "digits", "mode", "target", "estimate", "abs_diff", "verdict"];

fn columns(records: &[Value]) -> Vec<String> {
    let Some(Value::Object(first)) = records.first() else {
        return Vec::new();
    };
    if first.contains_key("verdict") && first.contains_key("id") {
        let mut cols: Vec<String> = REPORT_COLUMNS.iter().map(|c| c.to_string()).collect();
        if records.iter().any(|r| r.get("error").is_some()) {
            cols.push("error".into());
        }
        return cols;
    }
    first.keys().cloned().collect()
}

/// A cell: strings verbatim, string maps as `k=v;k=v`, anything else as compact JSON.
fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Object(m)) if m.values().all(Value::is_string) => m
            .iter()
            .map(|(k, v)| format!("{k}={}", v.as_str().unwrap_or_default()))
            .collect::<Vec<_>>()
            .join(";"),
        Some(other) => other.to_string(),
    }
}

pub fn write_header(out: &mut impl Write, format: Format, job: &Value) -> io::Result<()> {
    let header = serde_json::json!({ "cf": env!("CARGO_PKG_VERSION"), "job": job });
    match format {
        Format::Json => writeln!(out, "{}", serde_json::json!({ "header": header })),
        Format::Csv | Format::Table => writeln!(out, "# {header}"),
    }
}

pub fn write_records(out: &mut impl Write, format: Format, records: &[Value]) -> io::Result<()> {
    match format {
        Format::Json => {
            for r in records {
                writeln!(out, "{r}")?;
            }
            Ok(())
        }
        Format::Csv => {
            let cols = columns(records);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&cols)?;
            for r in records {
                w.write_record(cols.iter().map(|c| cell(r.get(c))))?;
            }
            w.flush()
        }
        Format::Table => {
            let cols = columns(records);
            let rows: Vec<Vec<String>> = records.iter().map(|r| cols.iter().map(|c| cell(r.get(c))).collect()).collect();
            let widths: Vec<usize> = cols
                .iter()
                .enumerate()
                .map(|(i, c)| rows.iter().map(|r| r[i].chars().count()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            let line = |cells: &[String]| {
                let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                padded.join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", line(&cols))?;
            for r in &rows {
                writeln!(out, "{}", line(r))?;
            }
            Ok(())
        }
    }
}
