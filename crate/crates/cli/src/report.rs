//! Command results and their serialization to CSV, JSON and files.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// CSV text; floats keep 17 significant digits.
    pub fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Cell {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::Text(s)
    }
}

/// A named table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: impl IntoIterator<Item = impl Into<String>>) -> Table {
        Table {
            name: name.to_string(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    pub fn json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Everything a command produces. The first table and the first figure are
/// the primary outputs written to stdout.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub name: String,
    pub summary: Value,
    pub tables: Vec<Table>,
    /// `(file stem, SVG document)`.
    pub figures: Vec<(String, String)>,
    /// Text written to stdout instead of the first table in CSV mode.
    pub text: Option<String>,
    /// Failed checks; non-zero makes the run exit with status 1.
    pub failed_checks: usize,
}

impl Report {
    pub fn new(name: &str, summary: Value) -> Report {
        Report {
            name: name.to_string(),
            summary,
            ..Report::default()
        }
    }

    /// The summary with every table attached.
    pub fn json(&self) -> Value {
        let mut tables = Map::new();
        for t in &self.tables {
            tables.insert(t.name.clone(), t.json());
        }
        json!({ "summary": self.summary, "tables": tables })
    }

    /// Writes every table as `<name>.csv`, the summary as `<report>.json`
    /// and every figure as `<stem>.svg`. Returns the paths written.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<String>, CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |file: String, body: &[u8]| -> Result<(), CliError> {
            let path = dir.join(&file);
            std::fs::write(&path, body).map_err(|e| io(&path, e))?;
            written.push(path.display().to_string());
            Ok(())
        };
        for t in &self.tables {
            put(format!("{}.csv", t.name), t.to_csv().as_bytes())?;
        }
        let summary = serde_json::to_string_pretty(&self.summary).expect("summaries serialize");
        put(format!("{}.json", self.name), summary.as_bytes())?;
        for (stem, svg) in &self.figures {
            put(format!("{stem}.svg"), svg.as_bytes())?;
        }
        Ok(written)
    }
}
