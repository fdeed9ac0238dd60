//! Run reports: the JSON document every subcommand can emit, plus the CSV
//! and plain-text renderings of coefficient listings.
//!
//! The JSON layout is schema-stable: top-level keys are always
//! `{command, params, results, diagnostics, version}` and each results
//! entry is `{index, value, method, tol_achieved}`. Values are plain JSON
//! numbers when real, two-element `[re, im]` arrays otherwise, and `null`
//! when not finite (e.g. an infinite feasibility constant, which is also
//! flagged in the diagnostics).

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

/// Relative size below which an imaginary part is considered a rounding
/// artifact and dropped from rendered values.
const IMAG_CUTOFF: f64 = 1e-14;

#[derive(Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: Value,
    pub results: Vec<ResultEntry>,
    pub diagnostics: Value,
    pub version: String,
}

#[derive(Serialize)]
pub struct ResultEntry {
    pub index: Vec<i64>,
    pub value: Value,
    pub method: String,
    pub tol_achieved: f64,
}

impl RunReport {
    pub fn new(command: &str, params: Value, results: Vec<ResultEntry>, diagnostics: Value) -> Self {
        RunReport {
            command: command.to_string(),
            params,
            results,
            diagnostics,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Pretty-printed JSON document, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A finite float as a JSON number; `null` otherwise (JSON has no
/// infinities).
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// A complex value: a plain number when the imaginary part is negligible,
/// a `[re, im]` pair otherwise.
pub fn complex_number(z: Complex64) -> Value {
    if z.im.abs() <= IMAG_CUTOFF * z.re.abs().max(1.0) {
        number(z.re)
    } else {
        Value::Array(vec![number(z.re), number(z.im)])
    }
}

/// Human-readable complex value, matching the JSON dropping rule.
pub fn format_complex(z: Complex64) -> String {
    if z.im.abs() <= IMAG_CUTOFF * z.re.abs().max(1.0) {
        format!("{}", z.re)
    } else if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

/// CSV listing with header `k1,k2[,k3],value,method` (one `k` column per
/// dimension), newline-terminated rows in the entries' order.
pub fn to_csv(dim: usize, entries: &[ResultEntry]) -> String {
    let mut out = String::new();
    for i in 1..=dim {
        out.push_str(&format!("k{i},"));
    }
    out.push_str("value,method\n");
    for e in entries {
        for k in &e.index {
            out.push_str(&format!("{k},"));
        }
        out.push_str(&format!("{},{}\n", render_value(&e.value), e.method));
    }
    out
}

/// Plain-text listing: one `c[k] = value  (method)` line per entry.
pub fn to_plain(entries: &[ResultEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let idx =
            e.index.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        out.push_str(&format!("c[{idx}] = {}  ({})\n", render_value(&e.value), e.method));
    }
    out
}

fn render_value(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        Value::Array(parts) => {
            let re = parts.first().map(render_value).unwrap_or_default();
            let im = parts.get(1).map(render_value).unwrap_or_default();
            if im.starts_with('-') {
                format!("{re}{im}i")
            } else {
                format!("{re}+{im}i")
            }
        }
        Value::String(s) => s.clone(),
        Value::Null => "nan".to_string(),
        other => other.to_string(),
    }
}
