//! Per-image dataset records stored as CSV.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Rendered,
    PseudoReal,
    Generated,
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rendered" => Ok(Role::Rendered),
            "pseudo_real" => Ok(Role::PseudoReal),
            "generated" => Ok(Role::Generated),
            _ => Err(Error::Parameter(format!("unknown role {s:?} (rendered, pseudo_real, generated)"))),
        }
    }
}

/// One image: its file, the seed its scene was derived from and the target
/// pose (centre in pixel coordinates).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub file: String,
    pub scene_seed: u64,
    pub center_px_x: f64,
    pub center_px_y: f64,
    pub yaw_rad: f64,
    pub burial_frac: f64,
    pub role: Role,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let m = Manifest { records };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.file.as_str()) {
                return Err(Error::Data(format!("duplicate manifest file name {}", r.file)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.records.is_empty() {
            w.write_record(["file", "scene_seed", "center_px_x", "center_px_y", "yaw_rad", "burial_frac", "role"])
                .map_err(csv_err)?;
        }
        for r in &self.records {
            w.serialize(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let records = rdr
            .deserialize()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() }))
            .collect::<Result<Vec<ManifestRecord>>>()?;
        Manifest::new(records)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    /// Reads a manifest and checks that every listed file exists next to it.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m = Manifest::from_csv(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        if let Some(r) = m.records.iter().find(|r| !dir.join(&r.file).is_file()) {
            return Err(Error::Data(format!("manifest {} lists missing file {}", path.display(), r.file)));
        }
        Ok(m)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}
