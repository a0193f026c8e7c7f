//! Tabular output: CSV with a `#`-prefixed header block, or JSON with the
//! same field names.

use std::io::Write;
use std::str::FromStr;

use serde_json::{json, Map, Value as Json};

use crate::gaussian::InfoReport;
use crate::{Error, Result};

/// Shortest round-trip form, switching to exponent notation for very small
/// or large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            // serde_json turns non-finite floats into null on its own
            Cell::Num(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Missing => Json::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

/// One InfoReport field as a cell; `None` for an unknown name.
pub fn report_cell(report: &InfoReport, name: &str) -> Option<Cell> {
    Some(match name {
        "S_total" => report.s_total.into(),
        "S_A" => report.s_a.into(),
        "S_B" => report.s_b.into(),
        "C_xi" => report.c_xi.into(),
        "positive" => Cell::Bool(report.positive),
        "separable" => Cell::Bool(report.separable),
        _ => Cell::Num(report.get(name)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidInput(format!("format must be csv or json, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(meta: Vec<(String, String)>, columns: Vec<String>) -> Self {
        Table {
            meta,
            columns,
            rows: Vec::new(),
        }
    }

    /// Report rows restricted to `outputs`; `t` is prepended when missing.
    /// No outputs means no columns and no rows.
    pub fn from_reports(meta: Vec<(String, String)>, outputs: &[String], reports: &[InfoReport]) -> Result<Self> {
        if outputs.is_empty() {
            return Ok(Table::new(meta, Vec::new()));
        }
        let mut columns = outputs.to_vec();
        if !columns.iter().any(|c| c == "t") {
            columns.insert(0, "t".into());
        }
        let rows = reports
            .iter()
            .map(|r| {
                columns
                    .iter()
                    .map(|c| report_cell(r, c).ok_or_else(|| Error::InvalidInput(format!("unknown output '{c}'"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Table { meta, columns, rows })
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k} = {v}").map_err(io_error)?;
        }
        if self.columns.is_empty() {
            return out.flush().map_err(io_error);
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(csv_error)?;
        }
        w.flush().map_err(io_error)
    }

    pub fn to_json(&self) -> Json {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            // repeated keys (warnings) collect into arrays
            match meta.get_mut(k) {
                Some(Json::Array(a)) => a.push(json!(v)),
                Some(prev) => *prev = json!([prev.clone(), v]),
                None => {
                    meta.insert(k.clone(), json!(v));
                }
            }
        }
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Json::Object(obj)
            })
            .collect();
        json!({ "meta": meta, "columns": self.columns, "rows": rows })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())
            .map_err(|e| Error::InvalidInput(format!("cannot write JSON: {e}")))?;
        writeln!(out).map_err(io_error)
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("cannot write output: {e}"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("cannot write CSV: {e}"))
}
