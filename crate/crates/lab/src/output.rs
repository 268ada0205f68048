//! Tables, plot data and the metadata sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use csv::{QuoteStyle, WriterBuilder};

use crate::config::Config;
use crate::error::LabError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
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

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
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
        Cell::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map(Into::into).unwrap_or(Cell::Empty)
    }
}

/// 17 significant digits in scientific notation, `.` as decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell `(row, column name)`.
    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.column(name).and_then(|c| self.rows.get(row).map(|r| &r[c]))
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, LabError> {
        let mut w = WriterBuilder::new()
            .quote_style(QuoteStyle::Necessary)
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.into_error()))
    }
}

/// Whitespace-separated two-column data.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl Plot {
    pub fn new(name: &str, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) -> Self {
        Plot {
            name: name.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points,
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!("# {} {}\n", self.x_label, self.y_label);
        for (x, y) in &self.points {
            s.push_str(&format!("{} {}\n", fmt_f64(*x), fmt_f64(*y)));
        }
        s
    }
}

/// Everything one experiment produces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    /// Extra `key = value` pairs for the sidecar.
    pub notes: Vec<(String, String)>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub struct RunInfo<'a> {
    pub experiment: &'a str,
    pub config: &'a Config,
    pub jobs: usize,
    pub wall_time_s: f64,
}

/// Writes `<table>.csv`, `<plot>.dat` and `<experiment>.meta.toml` into
/// `dir` and returns the written paths.
pub fn write_report(dir: &Path, report: &Report, info: &RunInfo) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in &report.tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.to_csv()?)?;
        written.push(path);
    }
    for p in &report.plots {
        let path = dir.join(format!("{}.dat", p.name));
        fs::write(&path, p.render())?;
        written.push(path);
    }
    let path = dir.join(format!("{}.meta.toml", info.experiment));
    fs::write(&path, sidecar(report, info)?)?;
    written.push(path);
    Ok(written)
}

fn sidecar(report: &Report, info: &RunInfo) -> Result<String, LabError> {
    let mut table = toml::Table::try_from(info.config).map_err(|e| LabError::Config {
        line: None,
        message: e.to_string(),
    })?;
    let mut meta = toml::Table::new();
    meta.insert("experiment".into(), info.experiment.into());
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    meta.insert(
        "seeds".into(),
        toml::Value::Array(info.config.run.seeds.iter().map(|s| (*s as i64).into()).collect()),
    );
    meta.insert("jobs".into(), (info.jobs as i64).into());
    meta.insert("wall_time_s".into(), info.wall_time_s.into());
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    meta.insert("created_unix".into(), created.into());
    for (k, v) in &report.notes {
        meta.insert(k.clone(), v.clone().into());
    }
    table.insert("meta".into(), toml::Value::Table(meta));
    toml::to_string_pretty(&table).map_err(|e| LabError::Config {
        line: None,
        message: e.to_string(),
    })
}
