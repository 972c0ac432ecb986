use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::config::{Mode, OutputFormat};
use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// 17 significant digits, the same on every platform.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Float(x) => {
                let raw = RawValue::from_string(format_float(*x)).map_err(serde::ser::Error::custom)?;
                raw.serialize(s)
            }
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

/// Column indices of a measured value, its target, and their absolute
/// difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorTriple {
    pub measured: usize,
    pub target: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub error_triples: Vec<ErrorTriple>,
    pub metadata: BTreeMap<String, Cell>,
    /// Acceptance flags, each derived from the rows and a fixed threshold.
    pub flags: BTreeMap<String, bool>,
}

impl ExperimentReport {
    pub fn new(mode: Mode, columns: &[&str]) -> Self {
        Self {
            mode,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            error_triples: Vec::new(),
            metadata: BTreeMap::new(),
            flags: BTreeMap::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Declares `error = |measured - target|` between three named columns.
    pub fn with_error(mut self, measured: &str, target: &str, error: &str) -> Self {
        let idx = |n: &str| self.column(n).unwrap_or_else(|| panic!("unknown column {n}"));
        let triple = ErrorTriple { measured: idx(measured), target: idx(target), error: idx(error) };
        self.error_triples.push(triple);
        self
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.metadata.insert(key.to_owned(), value.into());
    }

    pub fn flag(&mut self, key: &str, value: bool) {
        self.flags.insert(key.to_owned(), value);
    }

    /// Float column values, skipping non-float cells.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match r[i] {
                Cell::Float(x) => Some(x),
                _ => None,
            })
            .collect()
    }

    /// Every row has one cell per column, no float is NaN, and every
    /// declared error equals `|measured - target|` recomputed from the row.
    pub fn check_complete(&self) -> Result<(), HarnessError> {
        let nan = |c: &Cell| matches!(c, Cell::Float(x) if x.is_nan());
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(HarnessError::Data(format!(
                    "row {r} has {} cells for {} columns",
                    row.len(),
                    self.columns.len()
                )));
            }
            if let Some(c) = row.iter().position(nan) {
                return Err(HarnessError::Data(format!("NaN in row {r}, column {}", self.columns[c])));
            }
            for t in &self.error_triples {
                let (Cell::Float(m), Cell::Float(g), Cell::Float(e)) = (&row[t.measured], &row[t.target], &row[t.error])
                else {
                    return Err(HarnessError::Data(format!("non-numeric error triple in row {r}")));
                };
                if (m - g).abs() != *e {
                    return Err(HarnessError::Data(format!(
                        "row {r}: {} = {e} but |{} - {}| = {}",
                        self.columns[t.error],
                        self.columns[t.measured],
                        self.columns[t.target],
                        (m - g).abs()
                    )));
                }
            }
        }
        if let Some((k, _)) = self.metadata.iter().find(|(_, v)| nan(v)) {
            return Err(HarnessError::Data(format!("NaN in metadata {k}")));
        }
        Ok(())
    }

    pub fn render(&self, format: OutputFormat) -> Result<Vec<u8>, HarnessError> {
        self.check_complete()?;
        match format {
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> Result<Vec<u8>, HarnessError> {
        let data_err = |e: csv::Error| HarnessError::Data(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(data_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text)).map_err(data_err)?;
        }
        w.into_inner().map_err(|e| HarnessError::Data(e.to_string()))
    }

    fn render_json(&self) -> Result<Vec<u8>, HarnessError> {
        let mut out = serde_json::to_vec_pretty(&JsonView(self)).map_err(|e| HarnessError::Data(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

struct JsonView<'a>(&'a ExperimentReport);

struct Rows<'a>(&'a ExperimentReport);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = self.0;
        let mut seq = s.serialize_seq(Some(r.rows.len()))?;
        for row in &r.rows {
            let obj: Vec<(&String, &Cell)> = r.columns.iter().zip(row).collect();
            seq.serialize_element(&OrderedObject(&obj))?;
        }
        seq.end()
    }
}

/// Object keeping the column order rather than sorting keys.
struct OrderedObject<'a>(&'a [(&'a String, &'a Cell)]);

impl Serialize for OrderedObject<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for JsonView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = self.0;
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("mode", &r.mode)?;
        map.serialize_entry("metadata", &r.metadata)?;
        map.serialize_entry("flags", &r.flags)?;
        map.serialize_entry("columns", &r.columns)?;
        map.serialize_entry("rows", &Rows(r))?;
        map.end()
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn write_report(report: &ExperimentReport, path: Option<&Path>, format: OutputFormat) -> Result<(), HarnessError> {
    let bytes = report.render(format)?;
    match path {
        Some(path) => {
            let io = |source| HarnessError::Io { path: path.to_owned(), source };
            File::create(path).and_then(|mut f| f.write_all(&bytes)).map_err(io)
        }
        None => match std::io::stdout().write_all(&bytes) {
            // A closed reader (`| head`) is not a failure of the run.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|source| HarnessError::Io { path: "<stdout>".into(), source }),
        },
    }
}
