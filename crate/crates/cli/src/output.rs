//! Result files of one run.

use std::path::{Path, PathBuf};

use beppo::{io, Field};
use serde_json::{Map, Value};

use crate::config::Source;
use crate::error::Result;
use crate::plot::{emit_plot_script, PlotKind};

/// Shortest decimal that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Everything an experiment needs besides its own schema.
pub struct Context<'a> {
    pub source: &'a Source,
    pub out: PathBuf,
    pub seed: u64,
    pub shift: f64,
    outputs: Vec<String>,
    summary: Map<String, Value>,
}

impl<'a> Context<'a> {
    pub fn new(source: &'a Source, out: PathBuf, seed: u64, shift: f64) -> Result<Self> {
        std::fs::create_dir_all(&out)?;
        Ok(Self {
            source,
            out,
            seed,
            shift,
            outputs: Vec::new(),
            summary: Map::new(),
        })
    }

    fn record(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.outputs.push(name.to_string_lossy().into_owned());
        }
    }

    /// Writes an RFC 4180 CSV with a header row.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.out.join(name);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.record(&path);
        Ok(path)
    }

    pub fn plot(&mut self, csv: &Path, kind: PlotKind) -> Result<()> {
        let path = emit_plot_script(csv, kind)?;
        self.record(&path);
        Ok(())
    }

    pub fn field(&mut self, name: &str, field: &Field) -> Result<()> {
        let path = self.out.join(name);
        io::save_field(&path, field)?;
        self.record(&path);
        Ok(())
    }

    pub fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
        self.record(&path);
        Ok(())
    }

    pub fn summarize(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn finish(self) -> (Vec<String>, Map<String, Value>) {
        (self.outputs, self.summary)
    }
}
