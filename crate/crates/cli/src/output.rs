//! Tables rendered as CSV or JSON.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(String),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v.to_string())
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v.to_string())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v.to_string())
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.to_string())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits, so every double round-trips.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(s) => s.clone(),
            Cell::Real(x) => format_real(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // Integers beyond 2^53 stay exact as strings.
            Cell::Int(s) => match s.parse::<u64>() {
                Ok(v) if v < 1 << 53 => json!(v),
                _ => json!(s),
            },
            Cell::Real(x) if x.is_finite() => json!(x),
            Cell::Real(x) => json!(format_real(*x)),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        m.insert(c.to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// What a command produces: a table, and optionally a richer JSON document
/// used instead of the table rows for `--format json`.
pub struct Report {
    pub command: String,
    pub table: Table,
    pub json: Option<Value>,
}

pub struct Sink<'a> {
    pub format: Format,
    pub out: Option<&'a Path>,
    pub suppress_header: bool,
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Sink<'_> {
    pub fn render(&self, report: &Report) -> String {
        let mut text = String::new();
        match self.format {
            Format::Csv => {
                if !self.suppress_header {
                    let _ = writeln!(
                        text,
                        "# mppc {} {} generated_unix={}",
                        env!("CARGO_PKG_VERSION"),
                        report.command,
                        timestamp()
                    );
                }
                let _ = writeln!(text, "{}", report.table.columns.join(","));
                for row in &report.table.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    let _ = writeln!(text, "{}", cells.join(","));
                }
            }
            Format::Json => {
                let mut doc = Map::new();
                if !self.suppress_header {
                    doc.insert("generated_unix".into(), json!(timestamp()));
                    doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
                }
                doc.insert("command".into(), json!(report.command));
                match &report.json {
                    Some(Value::Object(extra)) => doc.extend(extra.clone()),
                    Some(other) => {
                        doc.insert("result".into(), other.clone());
                    }
                    None => {
                        doc.insert("rows".into(), report.table.json_rows());
                    }
                }
                text = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
                text.push('\n');
            }
        }
        text
    }

    pub fn emit(&self, report: &Report) -> std::io::Result<()> {
        let text = self.render(report);
        match self.out {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}
