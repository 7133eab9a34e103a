//! Deterministic CSV tables and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Environment variable overriding the artifact directory when `--out` is absent.
pub const OUT_ENV: &str = "LEVY_SPDE_OUT";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn text(s: &str) -> Self {
        Cell::Text(s.to_string())
    }

    /// 17 significant digits, so every float round-trips.
    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// CSV text with a leading `# schema: levy-spde/<name>/v1` line.
    pub fn to_csv(&self, name: &str) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).expect("csv output is utf-8");
        Ok(format!("# schema: levy-spde/{name}/v{SCHEMA_VERSION}\n{body}"))
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let path = dir.join(format!("{name}.csv"));
        fs::write(&path, self.to_csv(name)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

fn io(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub package: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub seed: u64,
    pub suites: &'a [String],
    /// LP base after resolving "auto".
    pub resolved_base: Option<u32>,
    pub config: &'a super::config::ExperimentConfig,
}

impl Manifest<'_> {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Io(e.to_string()))?;
        let path = dir.join("manifest.toml");
        fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// `--out`, else `$LEVY_SPDE_OUT`, else `./levy-spde-out`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("levy-spde-out")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_and_schema_line_leads() {
        let mut t = Table::new(&["a", "b"]);
        let x = 0.1 + 0.2;
        t.push(vec![Cell::Num(x), Cell::text("x,y")]);
        let s = t.to_csv("demo").unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("# schema: levy-spde/demo/v1"));
        assert_eq!(lines.next(), Some("a,b"));
        let row = lines.next().unwrap();
        let v: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert_eq!(v, x);
        assert!(row.ends_with("\"x,y\""));
    }
}
