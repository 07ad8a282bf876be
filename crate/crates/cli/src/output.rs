//! Artifact writing: `#`-prefixed JSON header, column line, data rows.
//!
//! Files are written to `<path>.partial` and renamed into place only once
//! complete, so a failed run never leaves a truncated artifact behind.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value as Json;

use crate::config::ExperimentConfig;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QCA_OUTPUT_DIR";

pub const TOOL: &str = "qca";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header block shared by every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct Header<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a std::collections::BTreeMap<String, Json>,
    pub wall_clock_s: f64,
}

impl<'a> Header<'a> {
    pub fn new(config: &'a ExperimentConfig, wall_clock_s: f64) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: config.command.name(),
            config: &config.resolved,
            wall_clock_s,
        }
    }
}

/// A column-major numeric table with an optional trailing text column.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(&'static str),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column line plus rows; the part of a CSV covered by the determinism contract.
    pub fn data_section(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_f64(*v),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(t) => (*t).to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Everything after the header line of an artifact.
pub fn data_section(text: &str) -> &str {
    match text.split_once('\n') {
        Some((first, rest)) if first.starts_with('#') => rest,
        _ => text,
    }
}

pub fn header_line(header: &Header) -> String {
    format!("# {}\n", serde_json::to_string(header).expect("header serializes"))
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Write `contents` to `path` through a `.partial` sibling.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = partial_path(path);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Pretty JSON document `{"header": ..., "data": ...}`.
pub fn json_document(header: &Header, data: &impl Serialize) -> String {
    let doc = serde_json::json!({ "header": header, "data": data });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// The `data` member of a JSON artifact, re-serialized canonically.
pub fn json_data_section(text: &str) -> Option<String> {
    let v: Json = serde_json::from_str(text).ok()?;
    serde_json::to_string(v.get("data")?).ok()
}

/// Default artifact location: `$QCA_OUTPUT_DIR/<command>.<ext>`, else the
/// working directory.
pub fn default_output(config: &ExperimentConfig) -> PathBuf {
    let name = format!("{}.{}", config.command.name(), config.command.extension());
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(name),
        _ => PathBuf::from(name),
    }
}

/// `foo.csv` → `foo.<suffix>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
    let mut name = stem;
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}
