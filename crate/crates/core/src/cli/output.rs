//! Rendering of command results as JSON or CSV, and atomic file output.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use super::config::Format;

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A command result: the JSON document plus its flattened table.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Shortest round-trip decimal, lowercase `e` exponent; non-finite values
/// become `inf`, `-inf` or `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        serde_json::Number::from_f64(x).expect("finite").to_string()
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, or `null` when not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

impl Report {
    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serialisable");
                s.push('\n');
                s.into_bytes()
            }
            Format::Csv => self.csv(),
        }
    }

    fn csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::NonNumeric)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            // NonNumeric leaves numeric-looking fields bare and quotes the rest
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_number(*x),
                    Cell::Text(s) => s.clone(),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            w.write_record(&fields).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// or to `out` when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>, out: &mut dyn Write) -> std::io::Result<()> {
    match path {
        None => {
            out.write_all(bytes)?;
            out.flush()
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}
