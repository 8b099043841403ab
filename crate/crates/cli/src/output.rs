//! Tables and their CSV / JSON rendering; files are replaced atomically.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // Debug gives the shortest representation that round-trips
            Cell::Num(v) => format!("{v:?}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => Value::String(format!("{v:?}")),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(t) => Value::String(t.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// (key, CSV text, JSON value): `# key=text` lines after the data in
    /// CSV, top-level keys in JSON.
    pub trailer: Vec<(String, String, Value)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            ..Table::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn header_config(cfg: &RunConfig) -> anyhow::Result<String> {
    Ok(serde_json::to_string(&cfg.echo())?)
}

pub fn render(table: &Table, cfg: &RunConfig) -> anyhow::Result<String> {
    let version = env!("CARGO_PKG_VERSION");
    match cfg.format {
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&format!("# coupled-bec {version} {}\n", cfg.command.name()));
            s.push_str(&format!("# config={}\n", header_config(cfg)?));
            s.push_str(&table.columns.join(","));
            s.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            for (key, text, _) in &table.trailer {
                s.push_str(&format!("# {key}={text}\n"));
            }
            Ok(s)
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("program".into(), json!("coupled-bec"));
            doc.insert("version".into(), json!(version));
            doc.insert("command".into(), json!(cfg.command.name()));
            doc.insert("config".into(), serde_json::to_value(cfg.echo())?);
            doc.insert("columns".into(), json!(table.columns));
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                .collect();
            doc.insert("rows".into(), Value::Array(rows));
            for (key, _, value) in &table.trailer {
                doc.insert(key.clone(), value.clone());
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(doc))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot move output into {}", path.display()))?;
    Ok(())
}
