//! Files are assembled in memory and written in one pass once every
//! computation has succeeded, so a failed run leaves nothing half-written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let mut buf = ryu::Buffer::new();
    let s = buf.format_finite(x);
    s.strip_suffix(".0").unwrap_or(s).to_string()
}

/// A CSV cell.
#[derive(Clone, Copy, Debug)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(&'static str),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Clone, Debug)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text, columns: header.len() }
    }

    /// Appends a row; non-finite numbers are rejected.
    pub fn row(&mut self, cells: &[Cell]) -> CliResult<()> {
        assert_eq!(cells.len(), self.columns, "CSV row width");
        let mut fields = Vec::with_capacity(cells.len());
        for c in cells {
            fields.push(match *c {
                Cell::Int(v) => v.to_string(),
                Cell::Text(t) => t.to_string(),
                Cell::Num(v) if v.is_finite() => fmt_f64(v),
                Cell::Num(v) => return Err(CliError::Runtime(format!("non-finite CSV value {v}"))),
            });
        }
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        Ok(())
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Runtime(format!("JSON encoding failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Pending output files, keyed by path relative to the output directory.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, rel: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((rel.into(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, rel: impl Into<PathBuf>, value: &T) -> CliResult<()> {
        let bytes = json_bytes(value)?;
        self.add(rel, bytes);
        Ok(())
    }

    pub fn add_csv(&mut self, rel: impl Into<PathBuf>, csv: Csv) {
        self.add(rel, csv.into_bytes());
    }

    /// Moves every file of `other` under the subdirectory `prefix`.
    pub fn nest(&mut self, prefix: &Path, other: Outputs) {
        for (rel, bytes) in other.files {
            self.files.push((prefix.join(rel), bytes));
        }
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn get(&self, rel: &Path) -> Option<&[u8]> {
        self.files.iter().find(|(p, _)| p == rel).map(|(_, b)| b.as_slice())
    }

    /// Writes everything under `dir`. On failure, files and directories
    /// created by this call are removed again.
    pub fn commit(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let mut created_dirs = Vec::new();
        let mut written = Vec::new();
        let result = self.write_all(dir, &mut created_dirs, &mut written);
        if result.is_err() {
            for f in written.iter().rev() {
                let _ = fs::remove_file(f);
            }
            for d in created_dirs.iter().rev() {
                let _ = fs::remove_dir(d);
            }
        }
        result.map(|()| written)
    }

    fn write_all(&self, dir: &Path, created_dirs: &mut Vec<PathBuf>, written: &mut Vec<PathBuf>) -> CliResult<()> {
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                create_dirs(parent, created_dirs)?;
            }
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(())
    }
}

fn create_dirs(dir: &Path, created: &mut Vec<PathBuf>) -> CliResult<()> {
    if dir.as_os_str().is_empty() || dir.is_dir() {
        return Ok(());
    }
    if let Some(parent) = dir.parent() {
        create_dirs(parent, created)?;
    }
    fs::create_dir(dir).map_err(|e| CliError::io(dir, e))?;
    created.push(dir.to_path_buf());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-20, 12345.678, 0.0, -2.5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(2.0), "2");
        assert_eq!(fmt_f64(0.25), "0.25");
    }

    #[test]
    fn csv_rejects_non_finite() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[1u64.into(), 0.5.into()]).unwrap();
        assert!(c.row(&[2u64.into(), f64::NAN.into()]).is_err());
        assert_eq!(String::from_utf8(c.into_bytes()).unwrap(), "a,b\n1,0.5\n");
    }

    #[test]
    fn failed_commit_cleans_up() {
        let tmp = tempfile::tempdir().unwrap();
        let blocker = tmp.path().join("x");
        fs::write(&blocker, b"file").unwrap();
        let mut out = Outputs::new();
        out.add("a/one.txt", b"1".to_vec());
        out.add("x/two.txt", b"2".to_vec());
        assert!(out.commit(tmp.path()).is_err());
        assert!(!tmp.path().join("a").exists());
        assert_eq!(fs::read(&blocker).unwrap(), b"file");
    }
}
