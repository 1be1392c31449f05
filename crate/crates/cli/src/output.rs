use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::format::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A numeric table with one documentation line per column.
pub struct Table {
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<(&'static str, &'static str)>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        let doc: Vec<String> = self.columns.iter().map(|(n, d)| format!("{n}: {d}")).collect();
        writeln!(file, "# {}", doc.join("; "))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(self.columns.iter().map(|(n, _)| *n))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| num(v)))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            columns: Vec<&'a str>,
            units: Vec<&'a str>,
            rows: Vec<Vec<serde_json::Value>>,
        }
        let doc = Doc {
            columns: self.columns.iter().map(|(n, _)| *n).collect(),
            units: self.columns.iter().map(|(_, d)| *d).collect(),
            rows: self.rows.iter().map(|r| r.iter().map(|&v| json_num(v)).collect()).collect(),
        };
        write_json(path, &doc)
    }
}

/// Number as JSON, rounded through the text formatting; non-finite
/// values become `null`.
pub fn json_num(v: f64) -> serde_json::Value {
    num(v).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(serde_json::Value::Null, Into::into)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}

/// Collects the files written by one command.
pub struct Outputs {
    pub dir: PathBuf,
    pub format: Format,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), format, written: Vec::new() })
    }

    /// Write `table` as `<stem>.csv` or `<stem>.json`.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<PathBuf> {
        let path = match self.format {
            Format::Csv => {
                let p = self.dir.join(format!("{stem}.csv"));
                table.write_csv(&p)?;
                p
            }
            Format::Json => {
                let p = self.dir.join(format!("{stem}.json"));
                table.write_json(&p)?;
                p
            }
        };
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn raw(&mut self, name: &str, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut file = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        write(&mut file)?;
        file.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params_file: Option<PathBuf>,
    pub preset: Option<String>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub timestamp: String,
    /// Full argument vector of the run.
    pub arguments: Vec<String>,
    /// Resolved parameters, as a parameter file.
    pub parameters: String,
}
