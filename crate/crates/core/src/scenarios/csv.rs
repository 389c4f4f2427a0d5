//! Deterministic CSV tables.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// Emitted as `# key: value` lines before the header.
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: Vec<String>) -> Self {
        CsvTable {
            metadata: vec![("tool".into(), format!("ntpm {}", env!("CARGO_PKG_VERSION")))],
            header,
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} columns", self.header.len()),
                got: format!("{}", row.len()),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Text form; every number carries 17 significant digits.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            // `+ 0.0` folds negative zero into zero.
            let cells: Vec<String> = row.iter().map(|x| format!("{:.16e}", x + 0.0)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Writes through a sibling temporary file and an atomic rename.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        tmp_name.push(format!(".tmp{}", std::process::id()));
        let tmp = path.with_file_name(tmp_name);
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(self.render().as_bytes())?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Parses the output of [`CsvTable::render`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut lines = text.lines();
        let mut header = None;
        for line in lines.by_ref() {
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once(": ").unwrap_or((meta, ""));
                metadata.push((k.to_string(), v.to_string()));
            } else {
                header = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
                break;
            }
        }
        let header = header.ok_or_else(|| Error::InvalidConfig("csv has no header".into()))?;
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let row = line
                .split(',')
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|e| Error::InvalidConfig(format!("bad cell {c:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(CsvTable { metadata, header, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = CsvTable::new(vec!["a".into(), "b".into()]);
        t.push(vec![0.1, std::f64::consts::PI]).unwrap();
        t.push(vec![-1e-300, 12345.678]).unwrap();
        let back = CsvTable::parse(&t.render()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn ragged_row_rejected() {
        let mut t = CsvTable::new(vec!["a".into()]);
        assert!(t.push(vec![1.0, 2.0]).is_err());
    }
}
