//! Stage-by-stage orchestration with persisted artifacts and a hashed run
//! manifest.

mod config;
mod manifest;
mod stages;

use thiserror::Error;

pub use config::{
    AlignConfig, CoverageConfig, EmbedderConfig, EvalConfig, GeneratorConfig, Paths,
    PipelineConfig, ResampleConfig, SamplerConfig, SweepConfig,
};
pub use manifest::{
    sha256_file, ArtifactRecord, FailedRound, RoundCounts, RunManifest, StageRecord,
    MANIFEST_FILE,
};
pub use stages::{
    coverage_comparison, Metrics, Run, BATCHES, COVERAGE, GENERATED, LOSS, METRICS, RESAMPLED,
    SUMMARIES, SWEEP, VARIANCE, WEIGHTS,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Io(String),
    #[error("manifest check failed: {0}")]
    Integrity(String),
}

impl PipelineError {
    /// 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            _ => 2,
        }
    }
}
