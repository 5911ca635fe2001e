//! Tabular output as CSV or JSON.
//!
//! CSV files open with a `#` comment line carrying the command, the SHA-256
//! of the resolved configuration and the seed. Numbers use the shortest
//! representation that round-trips to the same `f64`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as u64)
    }
}

impl From<u64> for Field {
    fn from(x: u64) -> Self {
        Field::Int(x)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_string())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Text(b.to_string())
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(x: Option<T>) -> Self {
        x.map_or(Field::Empty, Into::into)
    }
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(x) => format!("{x}"),
            Field::Int(i) => i.to_string(),
            Field::Text(s) => s.clone(),
            Field::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Num(x) => json!(x),
            Field::Int(i) => json!(i),
            Field::Text(s) => json!(s),
            Field::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Provenance written alongside every table.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn render(table: &Table, header: &Header, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = format!(
                "# cdsbound {} config_hash={} seed={}\n{}\n",
                header.command,
                header.config_hash,
                header.seed,
                table.columns.join(",")
            );
            for row in &table.rows {
                let line: Vec<String> = row.iter().map(Field::csv).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let object: Map<String, Value> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, f)| (c.clone(), f.json()))
                        .collect();
                    Value::Object(object)
                })
                .collect();
            let doc = json!({
                "command": header.command,
                "config_hash": header.config_hash,
                "seed": header.seed,
                "rows": rows,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            text.push('\n');
            text
        }
    }
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> Header {
        Header {
            command: "test",
            config_hash: config_hash(""),
            seed: 7,
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["m", "x", "note"]);
        t.push(vec![1usize.into(), 0.1.into(), Field::Empty]);
        t.push(vec![2usize.into(), 1e-16.into(), "a".into()]);
        let text = render(&t, &header(), Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "# cdsbound test config_hash=e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855 seed=7"
        );
        assert_eq!(lines[1], "m,x,note");
        assert_eq!(lines[2], "1,0.1,");
        assert_eq!(
            lines[3].split(',').nth(1).unwrap().parse::<f64>().unwrap(),
            1e-16
        );
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(&["m", "x"]);
        t.push(vec![3usize.into(), Field::Empty]);
        let doc: Value = serde_json::from_str(&render(&t, &header(), Format::Json)).unwrap();
        assert_eq!(doc["seed"], 7);
        assert_eq!(doc["rows"][0]["m"], 3);
        assert!(doc["rows"][0]["x"].is_null());
    }
}
