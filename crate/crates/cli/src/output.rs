//! Tables with provenance metadata, written as CSV or JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde_json::{json, Map, Value};

use crate::BadInput;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(BadInput::from(anyhow!("unknown format {other:?} (csv or json)")).into()),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
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
        Cell::Bool(v)
    }
}

/// Seventeen significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Provenance attached to every output.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub command: String,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub config: Value,
    /// Recorded only in the sidecar; results do not depend on it.
    pub workers: usize,
}

impl Metadata {
    fn json(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("tool".into(), json!("cpstat"));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("command".into(), json!(self.command));
        m.insert("seed".into(), json!(self.seed));
        m.insert("rng".into(), json!(self.rng));
        m.insert("config".into(), self.config.clone());
        m
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    /// File stem when written to a directory.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar results reported next to the table.
    pub summary: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn render(&self, meta: &Metadata, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(meta),
            Format::Json => self.render_json(meta),
        }
    }

    fn render_csv(&self, meta: &Metadata) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# cpstat {} schema_version {}",
            env!("CARGO_PKG_VERSION"),
            SCHEMA_VERSION
        );
        let _ = writeln!(out, "# command: {}", meta.command);
        let _ = writeln!(out, "# table: {}", self.name);
        if let Some(seed) = meta.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        if let Some(rng) = &meta.rng {
            let _ = writeln!(out, "# rng: {rng}");
        }
        let _ = writeln!(out, "# config: {}", meta.config);
        for (key, value) in &self.summary {
            let _ = writeln!(out, "# {key} = {}", value.csv());
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    fn render_json(&self, meta: &Metadata) -> String {
        let mut m = meta.json();
        m.insert("table".into(), json!(self.name));
        m.insert("columns".into(), json!(self.columns));
        let summary: Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), v.json()))
            .collect();
        m.insert("summary".into(), Value::Object(summary));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        m.insert("rows".into(), Value::Array(rows));
        let mut text = serde_json::to_string_pretty(&Value::Object(m)).unwrap_or_default();
        text.push('\n');
        text
    }
}

/// Writes the tables into `out` (plus `config.json`), or the first table to
/// stdout when no directory is given. Returns the files written.
pub fn emit(
    tables: &[Table],
    meta: &Metadata,
    format: Format,
    out: Option<&Path>,
) -> anyhow::Result<Vec<PathBuf>> {
    let Some(dir) = out else {
        if let Some(first) = tables.first() {
            print!("{}", first.render(meta, format));
        }
        return Ok(Vec::new());
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for table in tables {
        let path = dir.join(format!("{}.{}", table.name, format.extension()));
        std::fs::write(&path, table.render(meta, format))
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    let path = dir.join("config.json");
    let mut m = meta.json();
    m.insert("workers".into(), json!(meta.workers));
    let mut sidecar = serde_json::to_string_pretty(&Value::Object(m))?;
    sidecar.push('\n');
    std::fs::write(&path, sidecar).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(written)
}
