//! Tables, assertions and the files written for each experiment.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // shortest representation that round-trips
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Text(s) => write!(f, "{s}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub description: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[(&'static str, &'static str)]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|(name, description)| Column { name, description }).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let k = self.columns.iter().position(|c| c.name == name).unwrap_or_else(|| panic!("no column {name} in {}", self.name));
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::Int(v) => *v as f64,
                Cell::Float(v) => *v,
                Cell::Text(_) => f64::NAN,
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name))?;
        for r in &self.rows {
            w.write_record(r.iter().map(|c| c.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn schema(&self) -> Value {
        json!({
            "table": self.name,
            "format": "csv, header row, comma separated",
            "columns": self.columns.iter().map(|c| json!({ "name": c.name, "description": c.description })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub experiment: String,
    pub id: String,
    pub assertions: Vec<Assertion>,
    pub summary: Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
    /// Extra files as `(suffix, contents)`.
    #[serde(skip)]
    pub attachments: Vec<(String, String)>,
}

impl Report {
    pub fn new(experiment: &str, id: &str) -> Self {
        Report { experiment: experiment.into(), id: id.into(), summary: json!({}), ..Default::default() }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: Value) {
        self.assertions.push(Assertion { name: name.into(), passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    pub fn table(&self, name: &str) -> &Table {
        self.tables.iter().find(|t| t.name == name).unwrap_or_else(|| panic!("no table {name}"))
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.summary[key] = value;
    }

    /// Writes `<id>.<table>.csv`, `<id>.<table>.schema.json`, `<id>.report.json`,
    /// attachments, and `<id>.diagnostics.json` when an assertion failed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, contents: &str| -> Result<(), CliError> {
            let path = dir.join(name);
            fs::write(&path, contents)?;
            written.push(path);
            Ok(())
        };
        for t in &self.tables {
            put(format!("{}.{}.csv", self.id, t.name), &t.to_csv()?)?;
            put(format!("{}.{}.schema.json", self.id, t.name), &pretty(&t.schema()))?;
        }
        for (suffix, contents) in &self.attachments {
            put(format!("{}.{suffix}", self.id), contents)?;
        }
        put(format!("{}.report.json", self.id), &pretty(&serde_json::to_value(self).expect("serializable")))?;
        if !self.passed() {
            put(format!("{}.diagnostics.json", self.id), &self.diagnostics())?;
        }
        Ok(written)
    }

    pub fn diagnostics(&self) -> String {
        pretty(&json!({ "experiment": self.experiment, "id": self.id, "failed": self.failures() }))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
