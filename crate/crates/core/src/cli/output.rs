//! Tables, CSV emission and the JSON metadata sidecar.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::scenario::GuardStatus;

use super::config::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// Shortest representation that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// One row as ordered (column, value) pairs.
pub type Row = Vec<(String, Cell)>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Builds a table from rows that share their column order. Columns
    /// missing from a row are left empty.
    pub fn from_rows(rows: Vec<Row>) -> Self {
        let mut columns: Vec<String> = Vec::new();
        for row in &rows {
            for (name, _) in row {
                if !columns.contains(name) {
                    columns.push(name.clone());
                }
            }
        }
        let rows = rows
            .into_iter()
            .map(|row| {
                columns
                    .iter()
                    .map(|c| row.iter().find(|(n, _)| n == c).map(|(_, v)| v.clone()).unwrap_or_else(|| Cell::Text(String::new())))
                    .collect()
            })
            .collect();
        Self { columns, rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EngineVersions {
    pub spdiff: &'static str,
    pub grid: &'static str,
    pub ode: &'static str,
}

impl Default for EngineVersions {
    fn default() -> Self {
        Self {
            spdiff: env!("CARGO_PKG_VERSION"),
            grid: "split-step fourier, strang splitting order 2, midpoint time",
            ode: "rk4 / commutator-free magnus4, step halving to 1e-12",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar<'a> {
    pub command: &'a str,
    pub config: &'a ScenarioConfig,
    pub seed: u64,
    pub strict: bool,
    pub engine_versions: EngineVersions,
    pub guards: Vec<GuardStatus>,
    pub rows: usize,
    pub row_errors: usize,
    pub summary: serde_json::Value,
}

/// Paths of the files written for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub table: PathBuf,
    pub sidecar: PathBuf,
}

pub fn write_outputs(out_dir: &Path, command: &str, table: &Table, sidecar: &Sidecar<'_>) -> Result<Outputs> {
    std::fs::create_dir_all(out_dir)?;
    let table_path = out_dir.join(format!("{command}.csv"));
    let sidecar_path = out_dir.join(format!("{command}.json"));
    table.write_csv(&table_path)?;
    std::fs::write(&sidecar_path, serde_json::to_string_pretty(sidecar)?)?;
    Ok(Outputs { table: table_path, sidecar: sidecar_path })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(Cell::Num(x).render().parse::<f64>().unwrap(), x);
        }
        assert_eq!(Cell::Num(f64::NAN).render(), "NaN");
    }

    #[test]
    fn ragged_rows_align() {
        let t = Table::from_rows(vec![
            vec![("a".into(), 1.0.into()), ("b".into(), 2.0.into())],
            vec![("a".into(), 3.0.into()), ("c".into(), "x".into())],
        ]);
        assert_eq!(t.columns, ["a", "b", "c"]);
        assert_eq!(t.rows[1][1], Cell::Text(String::new()));
    }

    #[test]
    fn csv_quotes_fields() {
        let dir = tempfile::tempdir().unwrap();
        let t = Table::from_rows(vec![vec![("note".into(), "a,b \"c\"".into())]]);
        let p = dir.path().join("t.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "note\n\"a,b \"\"c\"\"\"\n");
    }
}
