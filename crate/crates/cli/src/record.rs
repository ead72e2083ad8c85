//! Experiment records and their on-disk form: one CSV per table, a checks
//! table, an SVG per figure and a JSON manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use inflation_core::fit::LinearFit;
use serde::Serialize;

use crate::error::CliError;
use crate::svg::Figure;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().filter_map(|r| r[i].as_f64()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedFit {
    pub name: String,
    #[serde(flatten)]
    pub fit: LinearFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub config_hash: String,
    pub parameters: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub figures: Vec<Figure>,
    pub runtime_seconds: f64,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, config_hash: &str) -> Self {
        Self {
            experiment: experiment.into(),
            config_hash: config_hash.into(),
            parameters: BTreeMap::new(),
            tables: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            figures: Vec::new(),
            runtime_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.into(), value.to_string());
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn fit(&mut self, name: &str, fit: LinearFit) {
        self.fits.push(NamedFit { name: name.into(), fit });
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Writes every artifact under `dir/<experiment>/` and returns the paths of
    /// the CSV files. CSV content depends only on the configuration.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let dir = dir.join(&self.experiment);
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
        let mut csvs = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&path)?;
            let mut header = vec!["config_hash".to_string()];
            header.extend(t.columns.iter().cloned());
            w.write_record(&header)?;
            for row in &t.rows {
                let mut rec = vec![self.config_hash.clone()];
                rec.extend(row.iter().map(Cell::render));
                w.write_record(&rec)?;
            }
            w.flush().map_err(|e| CliError::Io(path.display().to_string(), e))?;
            csvs.push(path);
        }
        let path = dir.join("checks.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["config_hash", "check", "status", "detail"])?;
        for c in &self.checks {
            w.write_record([self.config_hash.as_str(), &c.name, if c.passed { "PASS" } else { "FAIL" }, &c.detail])?;
        }
        w.flush().map_err(|e| CliError::Io(path.display().to_string(), e))?;
        csvs.push(path);
        for f in &self.figures {
            let path = dir.join(format!("{}.svg", f.name));
            fs::write(&path, f.render()).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        }
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self)?;
        fs::write(&path, json).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Ok(csvs)
    }

    /// Plain-text summary for the terminal.
    pub fn summary(&self) -> String {
        let mut s = format!("== {} (config {})\n", self.experiment, &self.config_hash[..12]);
        for t in &self.tables {
            s += &format!("-- {}\n{}\n", t.name, t.columns.join("\t"));
            for r in &t.rows {
                s += &r.iter().map(|c| match c {
                    Cell::Num(v) => format!("{v:.6}"),
                    other => other.render(),
                }).collect::<Vec<_>>().join("\t");
                s.push('\n');
            }
        }
        for f in &self.fits {
            s += &format!("fit {}: slope {:.6} intercept {:.6} R2 {:.6}\n", f.name, f.fit.slope, f.fit.intercept, f.fit.r_squared);
        }
        for w in &self.warnings {
            s += &format!("warning: {w}\n");
        }
        for c in &self.checks {
            s += &format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        s
    }
}
