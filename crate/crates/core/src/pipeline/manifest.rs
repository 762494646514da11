use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::attribute_reasoning::Usage;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedRound {
    pub round: usize,
    pub label: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounts {
    pub ok: usize,
    pub failed: usize,
    pub failures: Vec<FailedRound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub artifacts: Vec<ArtifactRecord>,
    pub wall_clock_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<RoundCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

/// What each stage produced, with content hashes for later verification.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path)
        .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    /// Loads `manifest.json` from `dir`, or an empty manifest if none exists.
    pub fn load_or_default(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        Self::load(dir)
    }

    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<(), PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest always serializes");
        std::fs::write(&path, text + "\n")
            .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
    }

    /// Hashes `files` (relative to `dir`) and records them under `stage`.
    pub fn record_stage(
        &mut self,
        dir: &Path,
        stage: &str,
        files: &[&str],
        wall_clock_secs: f64,
    ) -> Result<&mut StageRecord, PipelineError> {
        let artifacts = files
            .iter()
            .map(|f| {
                Ok(ArtifactRecord {
                    path: f.to_string(),
                    sha256: sha256_file(&dir.join(f))?,
                })
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        self.stages.insert(
            stage.to_string(),
            StageRecord {
                artifacts,
                wall_clock_secs,
                rounds: None,
                usage: None,
            },
        );
        Ok(self.stages.get_mut(stage).expect("just inserted"))
    }

    /// `path -> sha256` over every stage.
    pub fn artifact_hashes(&self) -> BTreeMap<String, String> {
        self.stages
            .values()
            .flat_map(|s| s.artifacts.iter())
            .map(|a| (a.path.clone(), a.sha256.clone()))
            .collect()
    }

    /// Re-hashes every recorded artifact under `dir`.
    pub fn verify(&self, dir: &Path) -> Result<(), PipelineError> {
        for (stage, rec) in &self.stages {
            for a in &rec.artifacts {
                let found = sha256_file(&dir.join(&a.path))?;
                if found != a.sha256 {
                    return Err(PipelineError::Integrity(format!(
                        "{stage}: {} has hash {found}, manifest says {}",
                        a.path, a.sha256
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "abc").unwrap();
        assert_eq!(
            sha256_file(&dir.path().join("a.txt")).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn verify_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "abc").unwrap();
        let mut m = RunManifest::default();
        m.record_stage(dir.path(), "sample", &["a.txt"], 0.1).unwrap();
        m.save(dir.path()).unwrap();
        let back = RunManifest::load(dir.path()).unwrap();
        back.verify(dir.path()).unwrap();
        std::fs::write(dir.path().join("a.txt"), "abd").unwrap();
        assert!(matches!(back.verify(dir.path()), Err(PipelineError::Integrity(_))));
    }
}
