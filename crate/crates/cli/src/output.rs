use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Provenance attached to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: &'static str,
}

impl Meta {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Self { config_hash, seed, tool_version: env!("CARGO_PKG_VERSION") }
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Rows of named metrics against one independent variable.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Name of the independent variable, including its unit.
    pub independent: String,
    pub columns: Vec<String>,
    pub rows: Vec<(f64, Vec<Cell>)>,
}

impl SweepResult {
    pub fn new(independent: &str, columns: Vec<String>) -> Self {
        Self { independent: independent.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, x: f64, cells: Vec<Cell>) {
        self.rows.push((x, cells));
    }

    fn check(&self) -> Result<(), CliError> {
        for (x, cells) in &self.rows {
            if cells.len() != self.columns.len() {
                return Err(CliError::Failure(format!(
                    "row at {} = {x} has {} cells, expected {}",
                    self.independent,
                    cells.len(),
                    self.columns.len()
                )));
            }
        }
        if self.rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(CliError::Failure(format!("{} values are not strictly increasing", self.independent)));
        }
        Ok(())
    }

    /// Writes the table as CSV with trailing `config_hash` and `seed` columns.
    pub fn write_csv(&self, path: &Path, meta: &Meta) -> Result<(), CliError> {
        self.check()?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| CliError::io(path, e))?;
        let mut header = vec![self.independent.clone()];
        header.extend(self.columns.iter().cloned());
        header.push("config_hash".into());
        header.push("seed".into());
        w.write_record(&header).map_err(|e| CliError::io(path, e))?;
        let seed = meta.seed.to_string();
        for (x, cells) in &self.rows {
            let mut rec = vec![x.to_string()];
            rec.extend(cells.iter().map(Cell::render));
            rec.push(meta.config_hash.clone());
            rec.push(seed.clone());
            w.write_record(&rec).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut s = SweepResult::new("x", vec!["y".into(), "status".into()]);
        s.push(1.0, vec![0.5.into(), "ok".into()]);
        s.push(2.5, vec![1e-7.into(), "a,b".into()]);
        s.write_csv(&path, &Meta::new("abc".into(), 7)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "x,y,status,config_hash,seed\n1,0.5,ok,abc,7\n2.5,0.0000001,\"a,b\",abc,7\n");
    }

    #[test]
    fn rejects_unsorted_and_ragged() {
        let dir = tempfile::tempdir().unwrap();
        let meta = Meta::new("h".into(), 1);
        let mut s = SweepResult::new("x", vec!["y".into()]);
        s.push(2.0, vec![1.0.into()]);
        s.push(1.0, vec![1.0.into()]);
        assert!(s.write_csv(&dir.path().join("a.csv"), &meta).is_err());
        let mut s = SweepResult::new("x", vec!["y".into()]);
        s.push(1.0, vec![]);
        assert!(s.write_csv(&dir.path().join("b.csv"), &meta).is_err());
    }
}
