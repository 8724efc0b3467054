//! CSV and JSON artifact writers.
//!
//! Floats are written with 17 significant digits so that every value
//! parses back to the same `f64`.

use crate::error::Result;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const PATH_COLUMNS: [&str; 5] = ["t", "reaction_x", "reaction_y", "iterations", "post_snap"];
pub const SNAPSHOT_COLUMNS: [&str; 8] = ["beam", "s", "x", "y", "N", "M", "f1", "f2"];
pub const POTENTIAL_COLUMNS: [&str; 5] = ["q1", "q2", "issip", "lssip", "oracle"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    F(f64),
    I(u64),
    B(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as u64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

/// Buffered CSV table with a fixed header.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    body: String,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            header: columns.iter().map(|s| s.to_string()).collect(),
            body: String::new(),
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.header.len(), "row width");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            match c {
                Cell::F(v) => self.body.push_str(&fmt_f64(*v)),
                Cell::I(v) => write!(self.body, "{v}").unwrap(),
                Cell::B(v) => self.body.push_str(if *v { "1" } else { "0" }),
            }
        }
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        format!("{}\n{}", self.header.join(","), self.body)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Io(e.to_string()))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("partial");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all().ok();
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn snapshot_path(out: &Path, step: usize) -> PathBuf {
    out.join("snapshots").join(format!("step_{step}.csv"))
}

/// Parse a CSV written by [`Table`] back into header and rows of floats.
pub fn read_table(text: &str) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|c| c.parse::<f64>().ok()).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()?;
    Some((header, rows))
}
