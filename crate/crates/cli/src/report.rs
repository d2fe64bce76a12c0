//! Report envelopes and provenance.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use nodal_core::estimators::describe;
use nodal_core::{MeasureFile, SpectralMeasure};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct MeasureInfo {
    pub descriptor: String,
    pub kappa: f64,
    pub atoms: usize,
    /// SHA-256 of the measure written as an atomic measure file.
    pub sha256: String,
}

impl MeasureInfo {
    pub fn of(m: &SpectralMeasure) -> Self {
        let text = MeasureFile::atomic(m).to_json();
        let digest = Sha256::digest(text.as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest {
            write!(hex, "{b:02x}").unwrap();
        }
        Self { descriptor: describe(m), kappa: m.kappa_value(), atoms: m.atoms().len(), sha256: hex }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub schedule: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub measure: Option<MeasureInfo>,
    /// Name of a deterministic field, when no measure was sampled.
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Self { tool: "nodal", version: env!("CARGO_PKG_VERSION"), command: command.into(), ..Default::default() }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub kind: &'static str,
    pub provenance: Provenance,
    pub result: T,
}

pub fn to_json<T: Serialize>(r: &Report<T>) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Write to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| CliError::io(Path::new("<stdout>"), e)),
            }
        }
    }
}
