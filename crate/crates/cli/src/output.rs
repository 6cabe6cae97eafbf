//! Report records and the three serialization modes.
//!
//! Every subcommand produces a list of flat records; the same fields are
//! emitted as human-readable text, CSV rows, or JSON lines, so scripted
//! and interactive use see identical data.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    #[value(name = "json-lines")]
    JsonLines,
}

#[derive(Debug, Clone)]
pub enum Value {
    Str(String),
    Num(f64),
    Int(i64),
    /// A metric whose denominator was zero.
    Undefined,
}

impl Value {
    fn as_text(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Num(v) => format!("{v}"),
            Value::Int(v) => format!("{v}"),
            Value::Undefined => "undefined".to_string(),
        }
    }

    fn as_json(&self) -> serde_json::Value {
        match self {
            Value::Str(s) => serde_json::Value::String(s.clone()),
            Value::Num(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Value::Int(v) => serde_json::Value::Number((*v).into()),
            Value::Undefined => serde_json::Value::Null,
        }
    }
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map(Value::Num).unwrap_or(Value::Undefined)
}

#[derive(Debug, Clone, Default)]
pub struct Record {
    pub fields: Vec<(&'static str, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &'static str, value: Value) -> &mut Self {
        self.fields.push((key, value));
        self
    }
}

/// Renders records in the requested format. CSV takes its header from the
/// first record; all records must share one field layout.
pub fn render(records: &[Record], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Text => {
            for (i, record) in records.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                for (key, value) in &record.fields {
                    let _ = writeln!(out, "{key}: {}", value.as_text());
                }
            }
        }
        Format::Csv => {
            if let Some(first) = records.first() {
                let header: Vec<&str> = first.fields.iter().map(|(k, _)| *k).collect();
                let _ = writeln!(out, "{}", header.join(","));
                for record in records {
                    let row: Vec<String> =
                        record.fields.iter().map(|(_, v)| v.as_text()).collect();
                    let _ = writeln!(out, "{}", row.join(","));
                }
            }
        }
        Format::JsonLines => {
            for record in records {
                let map: serde_json::Map<String, serde_json::Value> = record
                    .fields
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.as_json()))
                    .collect();
                let _ = writeln!(out, "{}", serde_json::Value::Object(map));
            }
        }
    }
    out
}
