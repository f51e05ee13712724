//! Report layout and its JSON / text renderings.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which reads
//! back to the same `f64`. Object keys come out sorted, so equal reports
//! give byte-identical output.

use std::fmt::Write as _;

use conecert::Check;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub input_echo: Value,
    pub result: Value,
    pub certificates: Vec<Check>,
    /// Only filled in when timing is requested.
    pub runtime_ms: Option<f64>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn to_json(report: &Report) -> String {
    let value = serde_json::to_value(report).expect("report is plain data");
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                out.push_str(&format_float(f));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, depth, out);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, x) in items.iter().enumerate() {
                    out.push_str(&pad(depth + 1));
                    write_value(x, depth + 1, out);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(depth));
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

fn short(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.6e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            let parts: Vec<String> = items.iter().map(short).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_array() || x.is_object()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => {
            let _ = writeln!(out, "  {prefix}: {}", short(v));
        }
    }
}

pub fn to_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", report.kind);
    out.push_str("result:\n");
    flatten("", &report.result, &mut out);
    out.push_str("certificates:\n");
    let width = report
        .certificates
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(0);
    for c in &report.certificates {
        let _ = writeln!(
            out,
            "  [{}] {:width$}  {:.3e}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.residual
        );
    }
    if let Some(ms) = report.runtime_ms {
        let _ = writeln!(out, "runtime: {ms:.3} ms");
    }
    let _ = writeln!(
        out,
        "status: {}",
        if report.all_pass() {
            "certified"
        } else {
            "certificate failure"
        }
    );
    out
}
