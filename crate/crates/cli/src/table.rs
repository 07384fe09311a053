use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::cli::Format;
use crate::failure::Failure;

pub const TOOL: &str = "eopm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(v) => json!(v),
        }
    }
}

/// A result table plus the resolved settings that produced it.
#[derive(Debug, Clone)]
pub struct Document {
    pub command: &'static str,
    pub config: BTreeMap<String, String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    pub fn new(command: &'static str, config: BTreeMap<String, String>, columns: &[&'static str]) -> Self {
        Document {
            command,
            config,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, Failure> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => Ok(self.json()),
        }
    }

    fn csv(&self) -> Result<Vec<u8>, Failure> {
        let mut out = format!("# {TOOL} {VERSION}\n# command = {}\n", self.command);
        for (key, value) in &self.config {
            out.push_str(&format!("# {key} = {value}\n"));
        }
        let mut writer = csv::Writer::from_writer(out.into_bytes());
        writer.write_record(&self.columns).map_err(csv_failure)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv)).map_err(csv_failure)?;
        }
        writer.into_inner().map_err(|e| Failure::Config(e.to_string()))
    }

    fn json(&self) -> Vec<u8> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let object: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(name, cell)| (name.to_string(), cell.json()))
                    .collect();
                Value::Object(object)
            })
            .collect();
        let doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "columns": self.columns,
            "rows": rows,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("JSON values always serialize");
        bytes.push(b'\n');
        bytes
    }
}

fn csv_failure(err: csv::Error) -> Failure {
    Failure::Config(format!("csv: {err}"))
}

pub fn write_to(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}
