//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// 17 significant digits: enough to round-trip any double.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A CSV file assembled in memory and written in one go.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table { name: name.to_string(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Writes `<dir>/<name>.csv` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(format!("{}.csv", self.name));
        fs::write(&path, self.to_bytes()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Record of one command run, written next to its outputs.
pub struct Manifest {
    pub command: String,
    pub config: Value,
    pub fingerprint: String,
    pub seed: u64,
    pub summary: Value,
}

impl Manifest {
    /// Writes `<dir>/<command>.manifest.json` listing each output with its SHA-256.
    pub fn write(&self, dir: &Path, outputs: &[PathBuf], wall: Duration) -> Result<PathBuf> {
        let mut files = Vec::with_capacity(outputs.len());
        for p in outputs {
            let bytes = fs::read(p).map_err(|e| CliError::io(p, e))?;
            files.push(json!({
                "file": p.file_name().map(|f| f.to_string_lossy().into_owned()),
                "sha256": sha256_hex(&bytes),
            }));
        }
        let doc = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "fingerprint": self.fingerprint,
            "seed": self.seed,
            "wall_time_s": wall.as_secs_f64(),
            "summary": self.summary,
            "outputs": files,
        });
        let path = dir.join(format!("{}.manifest.json", self.command));
        let text = serde_json::to_string_pretty(&doc).expect("json values serialize");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sha256_known_answer() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec!["1".into(), float(0.5)]);
        assert_eq!(String::from_utf8(t.to_bytes()).unwrap(), "a,b\n1,5.0000000000000000e-1\n");
    }

    proptest! {
        #[test]
        fn floats_round_trip(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            prop_assert_eq!(float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
