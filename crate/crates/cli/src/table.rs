use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
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

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip any f64.
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

/// Column-ordered result of one experiment. The last column is always
/// `pass`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Free-form notes that end up in the metadata (fits, thresholds).
    pub notes: serde_json::Map<String, Value>,
}

impl ResultTable {
    pub fn new(columns: &[&'static str]) -> Self {
        let mut columns = columns.to_vec();
        columns.push("pass");
        Self {
            columns,
            rows: Vec::new(),
            notes: serde_json::Map::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>, pass: bool) {
        assert_eq!(cells.len() + 1, self.columns.len(), "row width does not match the header");
        let mut row = cells;
        row.push(Cell::Bool(pass));
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.notes.insert(key.to_string(), value.into());
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Indices of rows whose `pass` column is false.
    pub fn failing_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.last() == Some(&Cell::Bool(false)))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failing_rows().is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Writes `path` and `path.meta.json`; returns the metadata path.
    pub fn write(&self, path: &Path, metadata: &Value) -> std::io::Result<PathBuf> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_csv())?;
        let mut meta = path.as_os_str().to_owned();
        meta.push(".meta.json");
        let meta = PathBuf::from(meta);
        fs::write(&meta, serde_json::to_string_pretty(metadata).expect("metadata is plain data") + "\n")?;
        Ok(meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(&["model", "t", "n"]);
        t.push(vec!["a,b".into(), 0.1.into(), 3usize.into()], true);
        t.push(vec!["x".into(), (1.0f64 / 3.0).into(), 0usize.into()], false);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "model,t,n,pass");
        assert_eq!(lines[1], "\"a,b\",1.0000000000000001e-1,3,true");
        let third: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(third, 1.0 / 3.0);
        assert_eq!(t.failing_rows(), vec![1]);
    }
}
