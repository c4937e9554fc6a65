//! Tabular output: CSV with 17 significant digits, or JSON.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Named columns of floats, one row per sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables of finite floats always serialize")
    }

    /// Writes `<dir>/<stem>.<ext>` and returns the file name.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<String> {
        let name = format!("{stem}.{}", format.extension());
        let body = match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        };
        write_file(&dir.join(&name), &body)?;
        Ok(name)
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Reads a headed CSV of floats.
pub fn read_csv(path: &Path) -> Result<Table> {
    let csv_err = |source| Error::Csv { path: path.display().to_string(), source };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let columns = reader.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let mut table = Table { columns, rows: Vec::new() };
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = record
            .iter()
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("{}: row {}: cannot parse `{cell}`: {e}", path.display(), line + 2))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        table.rows.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["t_ns", "value"]);
        t.push(vec![0.0, 0.5]);
        t.push(vec![200.0, 1.0 / 3.0]);
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t_ns,value"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,5.0000000000000000e-1"));
        assert_eq!(lines.next(), Some("2.0000000000000000e2,3.3333333333333331e-1"));
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(v in proptest::num::f64::NORMAL) {
            prop_assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
