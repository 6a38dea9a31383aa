//! Tables, sidecar manifests and plots written to the output directory.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::NAN))
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v.into())
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Fifteen significant digits, the same on every platform.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.14e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => format_number(*v).parse::<f64>().map(Value::from).unwrap_or(Value::Null),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Flag(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Collects everything one command writes.
pub struct Output {
    dir: PathBuf,
    format: Format,
    manifest: Value,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, format: Format, manifest: Value) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), format, manifest, written: Vec::new() })
    }

    fn write(&mut self, file: &str, contents: &str) -> io::Result<()> {
        let path = self.dir.join(file);
        fs::write(&path, contents)?;
        self.written.push(path);
        Ok(())
    }

    /// The table in the chosen format plus its `.manifest.json` sidecar.
    pub fn table(&mut self, table: &Table) -> io::Result<()> {
        let file = match self.format {
            Format::Csv => {
                let file = format!("{}.csv", table.name);
                self.write(&file, &table.to_csv())?;
                file
            }
            Format::Json => {
                let file = format!("{}.json", table.name);
                let body = serde_json::to_string_pretty(&table.to_json()).expect("table serialises") + "\n";
                self.write(&file, &body)?;
                file
            }
        };
        let mut manifest = self.manifest.clone();
        manifest["file"] = json!(file);
        manifest["columns"] = json!(table.columns);
        manifest["rows"] = json!(table.rows.len());
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
        self.write(&format!("{}.manifest.json", table.name), &body)
    }

    pub fn svg(&mut self, name: &str, svg: &str) -> io::Result<()> {
        self.write(&format!("{name}.svg"), svg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_formats() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(vec![0.1.into(), "x,y".into(), 3i64.into()]);
        t.push(vec![f64::NAN.into(), "plain".into(), true.into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1.00000000000000e-1,\"x,y\",3\nnan,plain,true\n");
    }

    #[test]
    fn json_rows_are_objects() {
        let mut t = Table::new("t", &["x", "ok"]);
        t.push(vec![2.5.into(), false.into()]);
        assert_eq!(t.to_json(), json!([{"x": 2.5, "ok": false}]));
    }
}
