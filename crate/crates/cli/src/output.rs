//! Report documents: a JSON tree with fixed-precision numbers, or a flat CSV table.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

/// Relative error attached to values computed from closed forms in floating point.
pub const CLOSED_FORM_REL_ERR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum Num {
    Float(f64),
    Int(i64),
}

/// One reported number with its error account.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub value: Num,
    /// `None` marks an exact value.
    pub err: Option<f64>,
    pub method: &'static str,
    /// Exact rational form, when there is one.
    pub rational: Option<String>,
}

impl Quantity {
    pub fn estimate(name: impl Into<String>, value: f64, err: f64, method: &'static str) -> Self {
        Self { name: name.into(), value: Num::Float(value), err: Some(err), method, rational: None }
    }

    pub fn closed_form(name: impl Into<String>, value: f64) -> Self {
        Self::estimate(name, value, CLOSED_FORM_REL_ERR * value.abs(), "closed_form")
    }

    pub fn exact(name: impl Into<String>, value: f64, method: &'static str) -> Self {
        Self { name: name.into(), value: Num::Float(value), err: None, method, rational: None }
    }

    pub fn integer(name: impl Into<String>, value: i64, method: &'static str) -> Self {
        Self { name: name.into(), value: Num::Int(value), err: None, method, rational: None }
    }

    pub fn with_rational(mut self, r: impl ToString) -> Self {
        self.rational = Some(r.to_string());
        self
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), Value::String(self.name.clone()));
        m.insert("value".into(), num_value(&self.value));
        match self.err {
            Some(e) => m.insert("err".into(), float_value(e)),
            None => m.insert("exact".into(), Value::Bool(true)),
        };
        m.insert("method".into(), Value::String(self.method.into()));
        if let Some(r) = &self.rational {
            m.insert("rational".into(), Value::String(r.clone()));
        }
        Value::Object(m)
    }
}

/// Marker prefix for floats that the writer prints with 17 significant digits.
const FLOAT_TAG: &str = "\u{0}f64:";

fn float_value(x: f64) -> Value {
    Value::String(format!("{FLOAT_TAG}{}", x.to_bits()))
}

fn num_value(n: &Num) -> Value {
    match n {
        Num::Float(x) => float_value(*x),
        Num::Int(i) => Value::from(*i),
    }
}

/// 17 significant digits; non-finite values become the strings `inf`, `-inf`, `nan`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_json_float(x: f64) -> String {
    if x.is_finite() {
        fmt17(x)
    } else {
        format!("\"{}\"", fmt17(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Pass,
    /// The check neither passed nor failed at the available precision.
    Inconclusive,
    Violation,
}

impl Status {
    /// Pass when every margin clears `pass`, violation when one falls below
    /// `-pass`, inconclusive otherwise.
    pub fn from_margins(margins: &[f64], pass: f64) -> Self {
        if margins.iter().all(|m| *m > pass) {
            Status::Pass
        } else if margins.iter().any(|m| *m < -pass) {
            Status::Violation
        } else {
            Status::Inconclusive
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Violation => 1,
            _ => 0,
        }
    }

    pub fn from_check(holds: bool) -> Self {
        if holds {
            Status::Pass
        } else {
            Status::Violation
        }
    }
}

/// Everything a command reports.
#[derive(Debug, Clone)]
pub struct Report {
    pub status: Status,
    /// Non-numeric findings: verdicts, flags, labels.
    pub findings: Map<String, Value>,
    /// The table written as CSV; one row per grid point or chain index.
    pub rows: Vec<Quantity>,
    /// Summary numbers reported in JSON only.
    pub summary: Vec<Quantity>,
}

impl Report {
    pub fn new(status: Status) -> Self {
        Self { status, findings: Map::new(), rows: vec![], summary: vec![] }
    }

    pub fn finding(mut self, key: &str, value: impl Serialize) -> Self {
        self.findings.insert(key.into(), serde_json::to_value(value).expect("serializable finding"));
        self
    }
}

/// `sha256("blob <len>\0" + content)`, the object hash git uses, over the
/// canonical JSON of the inputs.
pub fn content_hash(config: &Value) -> String {
    let body = config.to_string();
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn to_json(command: &str, config: &Value, report: &Report) -> String {
    let mut doc = Map::new();
    doc.insert("command".into(), Value::String(command.into()));
    doc.insert("config".into(), config.clone());
    doc.insert("input_hash".into(), Value::String(content_hash(config)));
    doc.insert("status".into(), serde_json::to_value(report.status).expect("status"));
    doc.insert("findings".into(), Value::Object(report.findings.clone()));
    doc.insert("rows".into(), Value::Array(report.rows.iter().map(Quantity::to_json).collect()));
    doc.insert("summary".into(), Value::Array(report.summary.iter().map(Quantity::to_json).collect()));
    let mut out = String::new();
    write_value(&Value::Object(doc), 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::String(s) => match s.strip_prefix(FLOAT_TAG) {
            Some(bits) => out.push_str(&fmt_json_float(f64::from_bits(bits.parse().expect("tagged float")))),
            None => out.push_str(&Value::String(s.clone()).to_string()),
        },
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => out.push_str(&i.to_string()),
            (_, Some(u), _) => out.push_str(&u.to_string()),
            (_, _, Some(f)) => out.push_str(&fmt_json_float(f)),
            _ => out.push_str("null"),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Columns `name,value,err,method`; exact values carry `err = 0` and method `exact`.
pub fn to_csv(report: &Report) -> String {
    let mut out = String::from("name,value,err,method\n");
    for q in &report.rows {
        let value = match q.value {
            Num::Float(x) => fmt17(x),
            Num::Int(i) => i.to_string(),
        };
        let (err, method) = match q.err {
            Some(e) => (fmt17(e), q.method),
            None => ("0".to_string(), "exact"),
        };
        let _ = writeln!(out, "{},{value},{err},{method}", csv_field(&q.name));
    }
    out
}
