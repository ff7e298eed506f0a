//! Output files are assembled in memory and written in one pass at the end of
//! a command, so a failing command leaves nothing half-written.

use std::path::{Path, PathBuf};

use geolyap_core::certifier::LyapunovSample;

use crate::CliError;

#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn add_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::failed(e.to_string()))?;
        s.push('\n');
        self.add(name, s);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::failed(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::failed(format!("csv: {e}")))
}

pub fn lyapunov_samples_csv(samples: &[LyapunovSample]) -> Result<Vec<u8>, CliError> {
    let header = ["t", "d", "V", "lie_V"].map(String::from);
    csv_bytes(&header, samples.iter().map(|s| vec![fmt(s.t), fmt(s.d), fmt(s.v), fmt(s.lie)]))
}

pub fn float(x: f64) -> String {
    fmt(x)
}
