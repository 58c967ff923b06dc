//! Columnar CSV files with '#'-prefixed metadata lines.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A CSV file in memory: metadata, column names and rows of text cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest text that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-3 && v.abs() < 1e7 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cells of one column parsed as numbers.
    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column(name).ok_or_else(|| Error::config(format!("no column '{name}'")))?;
        self.rows
            .iter()
            .map(|r| r[k].parse::<f64>().map_err(|e| Error::config(format!("column {name}: {e}"))))
            .collect()
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            if k.contains(['\n', ':']) || v.contains('\n') {
                return Err(Error::Contract(format!("metadata '{k}' cannot be written on one line")));
            }
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_error)?;
        for r in &self.rows {
            if r.len() != self.columns.len() {
                return Err(Error::Contract(format!("row has {} cells for {} columns", r.len(), self.columns.len())));
            }
            w.write_record(r).map_err(csv_error)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Table> {
        let mut meta = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let line = line.trim_start_matches('#').trim_start();
            match line.split_once(": ") {
                Some((k, v)) => meta.push((k.to_string(), v.to_string())),
                None => meta.push((line.trim_end_matches(':').to_string(), String::new())),
            }
        }
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let columns = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()).map_err(csv_error))
            .collect::<Result<_>>()?;
        Ok(Table { meta, columns, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Table> {
        Table::parse(&fs::read_to_string(path)?)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::config(format!("csv: {e}"))
}
