//! Tabular experiment output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Free-form `(key, value)` verdict lines.
    pub summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header line, then one line per row with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn parse_csv(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("report", "missing header line"))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse("report", format!("row {}: {c:?}: {e}", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(Error::parse(
                    "report",
                    format!("row {} has {} cells, header has {}", i + 1, row.len(), columns.len()),
                ));
            }
            rows.push(row);
        }
        Ok(Self {
            name: name.to_string(),
            columns,
            rows,
            summary: Vec::new(),
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "report".into());
        Self::parse_csv(&name, &fs::read_to_string(path)?)
    }

    /// Writes `<name>.csv`, `<name>_summary.txt` and optionally `<name>.json`
    /// into `dir`; returns the CSV path.
    pub fn save(&self, dir: &Path, json: bool) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.name));
        self.write_csv(fs::File::create(&csv)?)?;
        let summary: String = self
            .summary
            .iter()
            .map(|(k, v)| format!("{k}: {v}\n"))
            .collect();
        fs::write(dir.join(format!("{}_summary.txt", self.name)), summary)?;
        if json {
            let text = serde_json::to_string_pretty(self).expect("report serializes");
            fs::write(dir.join(format!("{}.json", self.name)), text)?;
        }
        Ok(csv)
    }
}
