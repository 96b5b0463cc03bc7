use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{write_text, ReportError};
use crate::Task;

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChecksum {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileChecksum {
    pub fn of(path: impl Into<PathBuf>) -> Result<Self, ReportError> {
        let path = path.into();
        let sha256 = sha256_file(&path)?;
        Ok(FileChecksum { path, sha256 })
    }
}

pub fn sha256_file(path: &Path) -> Result<String, ReportError> {
    let bytes = std::fs::read(path).map_err(|e| ReportError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Everything needed to audit and repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub tool_version: String,
    pub task: Task,
    pub seed: u64,
    /// Ensemble members, by model id.
    pub members: Vec<String>,
    /// One threshold per score column.
    pub thresholds: Vec<f64>,
    /// Full-precision metric values keyed like `test.f1` or
    /// `validation.f1.compassion`.
    pub metrics: BTreeMap<String, f64>,
    pub inputs: Vec<FileChecksum>,
    /// Effective configuration.
    pub config: toml::Table,
}

impl RunManifest {
    /// Recomputes every input checksum.
    pub fn verify(&self) -> Result<(), ReportError> {
        for input in &self.inputs {
            let actual = sha256_file(&input.path)?;
            if actual != input.sha256 {
                return Err(ReportError::Checksum {
                    path: input.path.clone(),
                    expected: input.sha256.clone(),
                    actual,
                });
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifest serializes to TOML")
    }

    pub fn save(&self, path: &Path) -> Result<(), ReportError> {
        write_text(path, &self.to_toml())
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
        toml::from_str(&text).map_err(|e| ReportError::Manifest {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        std::fs::write(&path, "abc").unwrap();
        assert_eq!(
            sha256_file(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_round_trip_and_verification() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data.tsv");
        std::fs::write(&data, "x\n").unwrap();
        let mut config = toml::Table::new();
        config.insert("seed".into(), toml::Value::Integer(221));
        let manifest = RunManifest {
            run_id: "r1".into(),
            tool_version: "0.1.0".into(),
            task: Task::Multilabel,
            seed: 221,
            members: vec!["baseline".into()],
            thresholds: vec![0.1 + 0.2, 1.0 / 3.0],
            metrics: [("test.f1".to_string(), 2.0 / 3.0)].into(),
            inputs: vec![FileChecksum::of(&data).unwrap()],
            config,
        };
        let path = dir.path().join(MANIFEST_FILE);
        manifest.save(&path).unwrap();
        let loaded = RunManifest::load(&path).unwrap();
        assert_eq!(loaded, manifest);
        loaded.verify().unwrap();

        std::fs::write(&data, "y\n").unwrap();
        assert!(matches!(loaded.verify(), Err(ReportError::Checksum { .. })));
    }
}
