//! Tables, CSV writing and the run manifest.
//!
//! Floats are written in shortest round-trip exponent form (`{:e}`), so
//! identical results give byte-identical files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format!("{x:e}"),
            Value::Bool(b) => b.to_string(),
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io {
            context: format!("formatting {}", self.file_name()),
            source: std::io::Error::other(e),
        };
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io {
            context: format!("formatting {}", self.file_name()),
            source: std::io::Error::other(e.to_string()),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub task: &'static str,
    pub preset: Option<String>,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
    pub warnings: Vec<String>,
}

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

/// Writes every table and `manifest.json` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, tables: &[Table], manifest: &Manifest) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        context: format!("creating {}", dir.display()),
        source,
    })?;
    for t in tables {
        write_file(&dir.join(t.file_name()), &t.to_csv()?)?;
    }
    let mut json = serde_json::to_vec_pretty(manifest).map_err(|e| CliError::Io {
        context: "serialising manifest".into(),
        source: std::io::Error::other(e),
    })?;
    json.push(b'\n');
    write_file(&dir.join("manifest.json"), &json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -2.5e-17, 1.0 / 3.0, 0.0] {
            let s = Value::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        let mut t = Table::new("t", &["ell", "n2", "value"]);
        t.push(vec![0usize.into(), 2usize.into(), 0.5.into()]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "ell,n2,value\n0,2,5e-1\n");
    }
}
