use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{Format, RunConfig};
use super::CliError;
use crate::estimation::RNG_ID;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Marker for absent values in CSV output.
pub const NULL: &str = "null";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl Cell {
    pub fn real(x: f64) -> Self {
        if x.is_finite() {
            Cell::Real(x)
        } else {
            Cell::Null
        }
    }

    pub fn opt_real(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::real)
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // 17 significant digits round-trip every f64.
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => NULL.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Null => Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Header {
    pub version: String,
    pub rng: String,
    pub seed: u64,
    pub config: RunConfig,
}

impl Header {
    pub fn new(config: &RunConfig) -> Self {
        Self { version: VERSION.to_string(), rng: RNG_ID.to_string(), seed: config.seed, config: config.clone() }
    }
}

/// Rows in canonical parameter order; every row has every column.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub header: Header,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(config: &RunConfig, columns: Vec<&'static str>) -> Self {
        Self { header: Header::new(config), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// A `#` comment line with the header, then a CSV table.
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        let header = serde_json::to_string(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(out, "# {header}").map_err(|e| CliError::Io(e.to_string()))?;
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.columns.iter().zip(r).map(|(k, v)| (k.to_string(), v.json())).collect();
                Value::Object(m)
            })
            .collect();
        let doc = json!({ "header": self.header, "rows": rows });
        let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}
