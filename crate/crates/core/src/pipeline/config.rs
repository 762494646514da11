use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::alignment::OptimizerConfig;
use crate::attribute_reasoning::{AttributeSchema, GenerationOptions, PromptTemplate, PromptTemplates, Stage};
use crate::evaluation::{ProjectionMode, DEFAULT_SLICES};
use crate::gp_sampler::KernelConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    /// Precomputed real embeddings; hashed features are used when absent.
    pub embeddings: Option<PathBuf>,
    /// Precomputed embeddings of `generated.jsonl`; required whenever
    /// `embeddings` is set.
    pub generated_embeddings: Option<PathBuf>,
    /// `x,y` rows for the precomputed coverage projection.
    pub coords: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedderConfig {
    pub dim: usize,
    pub seed: u64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self { dim: 256, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub k: usize,
    pub sigma: f64,
    pub max_rounds: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            k: 5,
            sigma: 0.5,
            max_rounds: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub endpoint: Option<String>,
    pub model: String,
    /// Built-in schema name; ignored when `attributes` is given.
    pub schema: String,
    pub attributes: Option<Vec<String>>,
    pub summarize_template: Option<PathBuf>,
    pub generate_template: Option<PathBuf>,
    pub n_samples: usize,
    pub retries: usize,
    pub max_in_flight: usize,
    pub summarize_temperature: f64,
    pub generate_temperature: f64,
    pub timeout_secs: u64,
    pub mock: bool,
    pub mock_fixtures: Option<PathBuf>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let opts = GenerationOptions::default();
        Self {
            endpoint: None,
            model: "gpt-3.5-turbo".into(),
            schema: "sst2".into(),
            attributes: None,
            summarize_template: None,
            generate_template: None,
            n_samples: opts.n_samples,
            retries: opts.retries,
            max_in_flight: opts.max_in_flight,
            summarize_temperature: opts.summarize_params.temperature,
            generate_temperature: opts.generate_params.temperature,
            timeout_secs: 120,
            mock: false,
            mock_fixtures: None,
        }
    }
}

impl GeneratorConfig {
    pub fn schema(&self) -> Result<AttributeSchema, PipelineError> {
        match &self.attributes {
            Some(attrs) => AttributeSchema::new(self.schema.clone(), attrs.clone())
                .map_err(|e| PipelineError::Config(e.to_string())),
            None => AttributeSchema::builtin(&self.schema).ok_or_else(|| {
                PipelineError::Config(format!(
                    "unknown schema `{}`; list `attributes` explicitly",
                    self.schema
                ))
            }),
        }
    }

    pub fn templates(&self) -> Result<PromptTemplates, PipelineError> {
        let load = |stage, path: &Option<PathBuf>, fallback: PromptTemplate| match path {
            Some(p) => PromptTemplate::from_file(stage, p).map_err(|e| PipelineError::Config(e.to_string())),
            None => Ok(fallback),
        };
        Ok(PromptTemplates {
            summarize: load(Stage::Summarize, &self.summarize_template, PromptTemplate::default_summarize())?,
            generate: load(Stage::Generate, &self.generate_template, PromptTemplate::default_generate())?,
        })
    }

    pub fn options(&self) -> GenerationOptions {
        let mut opts = GenerationOptions {
            n_samples: self.n_samples,
            retries: self.retries,
            max_in_flight: self.max_in_flight,
            ..Default::default()
        };
        opts.summarize_params.temperature = self.summarize_temperature;
        opts.generate_params.temperature = self.generate_temperature;
        opts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    /// Number of projection directions.
    pub m: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            m: 100,
            seed: 0,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResampleConfig {
    /// Resampled size; defaults to the generated corpus size.
    pub zeta: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageConfig {
    pub k: usize,
    pub steps: usize,
    pub projection: ProjectionMode,
    pub baseline_seed: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            k: 5,
            steps: 50,
            projection: ProjectionMode::Pca,
            baseline_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub n_slices: usize,
    pub seed: u64,
    pub coverage: CoverageConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            n_slices: DEFAULT_SLICES,
            seed: 0,
            coverage: CoverageConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub taus: Vec<f64>,
    pub ks: Vec<usize>,
    pub thetas: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            taus: vec![0.05, 0.3, 0.9, 1.5, 10.0],
            ks: vec![5],
            thetas: vec![10, 50, 100, 500, 1000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default)]
    pub embedder: EmbedderConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub alignment: AlignConfig,
    #[serde(default)]
    pub resample: ResampleConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    /// Parses a TOML file. Relative paths are taken relative to the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn rebase_paths(&mut self, base: &Path) {
        let p = &mut self.paths;
        rebase(base, &mut p.corpus);
        rebase(base, &mut p.output_dir);
        for opt in [&mut p.embeddings, &mut p.generated_embeddings, &mut p.coords] {
            if let Some(x) = opt {
                rebase(base, x);
            }
        }
        let g = &mut self.generator;
        for opt in [&mut g.summarize_template, &mut g.generate_template, &mut g.mock_fixtures] {
            if let Some(x) = opt {
                rebase(base, x);
            }
        }
    }

    /// Replaces every randomness seed except the embedder's.
    pub fn override_seed(&mut self, seed: u64) {
        self.alignment.seed = seed;
        self.resample.seed = seed;
        self.eval.seed = seed;
        self.eval.coverage.baseline_seed = seed;
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        self.kernel
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.embedder.dim < 2 {
            return bad(format!("embedder.dim must be at least 2, got {}", self.embedder.dim));
        }
        let s = &self.sampler;
        if s.k == 0 || s.max_rounds == 0 {
            return bad("sampler.k and sampler.max_rounds must be at least 1".into());
        }
        if !(s.sigma > 0.0 && s.sigma < 1.0) {
            return bad(format!("sampler.sigma must lie in (0, 1), got {}", s.sigma));
        }
        let g = &self.generator;
        if g.n_samples == 0 || g.max_in_flight == 0 {
            return bad("generator.n_samples and generator.max_in_flight must be at least 1".into());
        }
        g.schema()?;
        if self.alignment.m == 0 {
            return bad("alignment.m must be at least 1".into());
        }
        self.alignment
            .optimizer
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.resample.zeta == Some(0) {
            return bad("resample.zeta must be at least 1".into());
        }
        let e = &self.eval;
        if e.n_slices == 0 || e.coverage.k == 0 || e.coverage.steps == 0 {
            return bad("eval.n_slices, eval.coverage.k and eval.coverage.steps must be at least 1".into());
        }
        if self.paths.embeddings.is_some() != self.paths.generated_embeddings.is_some() {
            return bad("paths.embeddings and paths.generated_embeddings must be given together".into());
        }
        if e.coverage.projection == ProjectionMode::Precomputed && self.paths.coords.is_none() {
            return bad("precomputed coverage projection needs paths.coords".into());
        }
        let sw = &self.sweep;
        if sw.taus.iter().any(|t| !(*t > 0.0 && t.is_finite()))
            || sw.ks.contains(&0)
            || sw.thetas.contains(&0)
        {
            return bad("sweep values must be positive".into());
        }
        Ok(())
    }
}
