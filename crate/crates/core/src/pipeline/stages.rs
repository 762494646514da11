use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::manifest::{FailedRound, RoundCounts, RunManifest};
use super::{PipelineConfig, PipelineError};
use crate::alignment::{
    gram_schmidt_projections, learn_weights, read_weights_csv, resample, write_loss_csv,
    write_weights_csv,
};
use crate::attribute_reasoning::{
    run_generation_rounds, write_summaries, GeneratorClient, HttpClient, HttpClientConfig,
    MockClient, Usage,
};
use crate::corpus_io::{hash_embed_corpus, load_corpus, load_embeddings, save_corpus, Corpus};
use crate::evaluation::{
    coverage_curve, project_2d, sliced_wasserstein, vocabulary_size, CoverageReport, Point2D,
};
use crate::gp_sampler::{read_batches, write_batches, write_variance_csv, KernelConfig, TrackerState};
use crate::matrix::Matrix;

pub const BATCHES: &str = "batches.jsonl";
pub const VARIANCE: &str = "variance.csv";
pub const SUMMARIES: &str = "summaries.jsonl";
pub const GENERATED: &str = "generated.jsonl";
pub const WEIGHTS: &str = "weights.csv";
pub const LOSS: &str = "loss.csv";
pub const RESAMPLED: &str = "resampled.jsonl";
pub const METRICS: &str = "metrics.json";
pub const COVERAGE: &str = "coverage.csv";
pub const SWEEP: &str = "sweep.csv";

trait OrFail<T> {
    fn or_fail(self) -> Result<T, PipelineError>;
}

impl<T, E: Display> OrFail<T> for Result<T, E> {
    fn or_fail(self) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::Failed(e.to_string()))
    }
}

#[derive(Default)]
struct StageOutput {
    files: Vec<&'static str>,
    rounds: Option<RoundCounts>,
    usage: Option<Usage>,
}

impl StageOutput {
    fn files(files: &[&'static str]) -> Self {
        Self {
            files: files.to_vec(),
            ..Default::default()
        }
    }
}

/// Loaded configuration plus run-wide switches.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: PipelineConfig,
    /// Use the offline client whatever the config says.
    pub force_mock: bool,
}

impl Run {
    pub fn new(config: PipelineConfig) -> Self {
        Self {
            config,
            force_mock: false,
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.paths.output_dir
    }

    fn stage(
        &self,
        name: &'static str,
        body: impl FnOnce(&Self) -> Result<StageOutput, PipelineError>,
    ) -> Result<(), PipelineError> {
        let wrap = |e: PipelineError| match e {
            PipelineError::Config(_) | PipelineError::Stage { .. } => e,
            other => PipelineError::Stage {
                stage: name,
                message: other.to_string(),
            },
        };
        let out = self.out_dir();
        std::fs::create_dir_all(out)
            .map_err(|e| wrap(PipelineError::Io(format!("{}: {e}", out.display()))))?;
        log::info!("stage {name}");
        let start = Instant::now();
        let output = body(self).map_err(wrap)?;
        let elapsed = start.elapsed().as_secs_f64();

        let cfg = &self.config;
        let mut manifest = RunManifest::load_or_default(out).map_err(wrap)?;
        manifest.config = serde_json::to_value(cfg).expect("config always serializes");
        manifest.seeds = [
            ("embedder", cfg.embedder.seed),
            ("alignment", cfg.alignment.seed),
            ("resample", cfg.resample.seed),
            ("eval", cfg.eval.seed),
            ("coverage_baseline", cfg.eval.coverage.baseline_seed),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let rec = manifest
            .record_stage(out, name, &output.files, elapsed)
            .map_err(wrap)?;
        rec.rounds = output.rounds;
        rec.usage = output.usage;
        manifest.save(out).map_err(wrap)
    }

    fn real(&self) -> Result<(Corpus, Matrix), PipelineError> {
        let corpus = load_corpus(&self.config.paths.corpus).or_fail()?;
        let emb = self.embed(&corpus, self.config.paths.embeddings.as_deref())?;
        Ok((corpus, emb))
    }

    fn generated(&self) -> Result<(Corpus, Matrix), PipelineError> {
        let corpus = load_corpus(self.out_dir().join(GENERATED)).or_fail()?;
        let emb = self.embed(&corpus, self.config.paths.generated_embeddings.as_deref())?;
        Ok((corpus, emb))
    }

    fn embed(&self, corpus: &Corpus, file: Option<&Path>) -> Result<Matrix, PipelineError> {
        let e = &self.config.embedder;
        let m = match file {
            Some(path) => load_embeddings(path, corpus).or_fail()?,
            None => hash_embed_corpus(corpus, e.dim, e.seed).or_fail()?,
        };
        Ok(Matrix::from(&m))
    }

    fn client(&self) -> Result<Box<dyn GeneratorClient>, PipelineError> {
        let g = &self.config.generator;
        if self.force_mock || g.mock {
            return Ok(Box::new(match &g.mock_fixtures {
                Some(path) => MockClient::from_fixture_file(path).or_fail()?,
                None => MockClient::new(),
            }));
        }
        let endpoint = g.endpoint.clone().ok_or_else(|| {
            PipelineError::Config("generator.endpoint is required unless the mock client is used".into())
        })?;
        let mut http = HttpClientConfig::new(endpoint, g.model.clone());
        http.timeout = Duration::from_secs(g.timeout_secs);
        Ok(Box::new(HttpClient::new(http)))
    }

    pub fn sample(&self) -> Result<(), PipelineError> {
        self.stage("sample", |run| {
            let s = &run.config.sampler;
            let (corpus, emb) = run.real()?;
            let mut tracker = TrackerState::new(emb.clone(), run.config.kernel).or_fail()?;
            let batches = tracker.run_sampling(s.k, s.sigma, s.max_rounds).or_fail()?;
            if batches.is_empty() {
                return Err(PipelineError::Failed(format!(
                    "no batch of {} could be drawn from {} records",
                    s.k,
                    corpus.len()
                )));
            }
            let mut replay = TrackerState::new(emb, run.config.kernel).or_fail()?;
            let mut snapshots = vec![(0, replay.variance().to_vec())];
            for b in &batches {
                replay.update(b).or_fail()?;
                snapshots.push((b.round + 1, replay.variance().to_vec()));
            }
            let out = run.out_dir();
            write_batches(out.join(BATCHES), &batches, &corpus).or_fail()?;
            write_variance_csv(out.join(VARIANCE), &snapshots, &corpus).or_fail()?;
            log::info!("{} batches", batches.len());
            Ok(StageOutput::files(&[BATCHES, VARIANCE]))
        })
    }

    pub fn generate(&self) -> Result<(), PipelineError> {
        self.stage("generate", |run| {
            let g = &run.config.generator;
            let schema = g.schema()?;
            let templates = g.templates()?;
            let client = run.client()?;
            let corpus = load_corpus(&run.config.paths.corpus).or_fail()?;
            let out = run.out_dir();
            let batches = read_batches(out.join(BATCHES), &corpus).or_fail()?;
            let reports =
                run_generation_rounds(client.as_ref(), &batches, &corpus, &schema, &templates, &g.options());

            let mut counts = RoundCounts::default();
            let mut usage = None::<Usage>;
            let mut summaries = Vec::new();
            let mut records = Vec::new();
            for r in reports {
                match r.outcome {
                    Ok(o) => {
                        counts.ok += 1;
                        if o.usage != Usage::default() {
                            *usage.get_or_insert_with(Usage::default) += o.usage;
                        }
                        summaries.push(o.summary);
                        records.extend(o.records);
                    }
                    Err(e) => {
                        counts.failed += 1;
                        counts.failures.push(FailedRound {
                            round: r.round,
                            label: r.label,
                            error: e.to_string(),
                        });
                    }
                }
            }
            if counts.ok == 0 {
                return Err(PipelineError::Failed(format!(
                    "all {} rounds failed; first error: {}",
                    counts.failed,
                    counts.failures.first().map_or("none", |f| f.error.as_str())
                )));
            }
            if counts.failed > 0 {
                log::warn!("{} of {} rounds failed", counts.failed, counts.ok + counts.failed);
            }
            let generated = Corpus::new(records, Some(corpus.label_set().to_vec())).or_fail()?;
            write_summaries(out.join(SUMMARIES), &summaries).or_fail()?;
            save_corpus(out.join(GENERATED), &generated).or_fail()?;
            log::info!("{} synthetic records from {} summaries", generated.len(), summaries.len());
            Ok(StageOutput {
                files: vec![SUMMARIES, GENERATED],
                rounds: Some(counts),
                usage,
            })
        })
    }

    pub fn align(&self) -> Result<(), PipelineError> {
        self.stage("align", |run| {
            let a = &run.config.alignment;
            let (_, real) = run.real()?;
            let (gen_corpus, gen) = run.generated()?;
            let projections = gram_schmidt_projections(real.cols(), a.m, a.seed).or_fail()?;
            let fit = learn_weights(&real, &gen, &projections, &a.optimizer).or_fail()?;
            log::info!(
                "loss {:.3e} -> {:.3e} in {} steps",
                fit.initial_loss(),
                fit.final_loss(),
                fit.iterations()
            );
            let out = run.out_dir();
            write_weights_csv(out.join(WEIGHTS), &gen_corpus, &fit.weights).or_fail()?;
            write_loss_csv(out.join(LOSS), &fit.loss_trace).or_fail()?;
            Ok(StageOutput::files(&[WEIGHTS, LOSS]))
        })
    }

    pub fn resample(&self) -> Result<(), PipelineError> {
        self.stage("resample", |run| {
            let r = &run.config.resample;
            let out = run.out_dir();
            let gen = load_corpus(out.join(GENERATED)).or_fail()?;
            let weights = read_weights_csv(out.join(WEIGHTS), &gen).or_fail()?;
            let zeta = r.zeta.unwrap_or(gen.len());
            let picked = resample(&gen, &weights, zeta, r.seed).or_fail()?;
            save_corpus(out.join(RESAMPLED), &picked).or_fail()?;
            Ok(StageOutput::files(&[RESAMPLED]))
        })
    }

    pub fn evaluate(&self) -> Result<(), PipelineError> {
        self.stage("evaluate", |run| {
            let cfg = &run.config;
            let e = &cfg.eval;
            let out = run.out_dir();
            let (corpus, real) = run.real()?;
            let mut metrics = Metrics {
                n_real: corpus.len(),
                vocab_real: vocabulary_size(&corpus),
                ..Default::default()
            };
            if out.join(GENERATED).exists() {
                let (gen_corpus, gen) = run.generated()?;
                metrics.n_generated = Some(gen_corpus.len());
                metrics.vocab_generated = Some(vocabulary_size(&gen_corpus));
                metrics.sw_ori_gen = Some(sliced_wasserstein(&real, &gen, e.n_slices, e.seed).or_fail()?);
                if out.join(RESAMPLED).exists() {
                    let picked = load_corpus(out.join(RESAMPLED)).or_fail()?;
                    let rows = rows_of_resampled(&gen_corpus, &gen, &picked)?;
                    metrics.n_resampled = Some(picked.len());
                    metrics.vocab_resampled = Some(vocabulary_size(&picked));
                    metrics.sw_ori_resampled =
                        Some(sliced_wasserstein(&real, &rows, e.n_slices, e.seed).or_fail()?);
                }
            }
            let points = project_2d(&real, e.coverage.projection, cfg.paths.coords.as_deref()).or_fail()?;
            let (gp, random) = coverage_comparison(
                &real,
                &points,
                cfg.kernel,
                e.coverage.k,
                e.coverage.steps,
                e.coverage.baseline_seed,
            )?;
            metrics.coverage_k = gp.k;
            metrics.coverage_steps = gp.steps;
            metrics.gp_coverage = gp.final_rate();
            metrics.random_coverage = random.final_rate();

            let mut w = csv::Writer::from_path(out.join(COVERAGE)).or_fail()?;
            w.write_record(["step", "gp", "random"]).or_fail()?;
            for (i, (a, b)) in gp.rates.iter().zip(&random.rates).enumerate() {
                w.write_record([(i + 1).to_string(), a.to_string(), b.to_string()])
                    .or_fail()?;
            }
            w.flush().or_fail()?;
            let text = serde_json::to_string_pretty(&metrics).expect("metrics always serialize");
            std::fs::write(out.join(METRICS), text + "\n").or_fail()?;
            Ok(StageOutput::files(&[METRICS, COVERAGE]))
        })
    }

    pub fn sweep(&self) -> Result<(), PipelineError> {
        self.stage("sweep", |run| {
            let cfg = &run.config;
            let (e, sw) = (&cfg.eval, &cfg.sweep);
            let (_, real) = run.real()?;
            let (gen_corpus, gen) = run.generated()?;
            let points = project_2d(&real, e.coverage.projection, cfg.paths.coords.as_deref()).or_fail()?;
            let sw_gen = sliced_wasserstein(&real, &gen, e.n_slices, e.seed).or_fail()?;

            let mut by_theta = Vec::with_capacity(sw.thetas.len());
            for &m in &sw.thetas {
                let a = &cfg.alignment;
                let projections = gram_schmidt_projections(real.cols(), m, a.seed).or_fail()?;
                let fit = learn_weights(&real, &gen, &projections, &a.optimizer).or_fail()?;
                let zeta = cfg.resample.zeta.unwrap_or(gen_corpus.len());
                let picked = resample(&gen_corpus, &fit.weights, zeta, cfg.resample.seed).or_fail()?;
                let rows = rows_of_resampled(&gen_corpus, &gen, &picked)?;
                let sw_res = sliced_wasserstein(&real, &rows, e.n_slices, e.seed).or_fail()?;
                by_theta.push((m, fit.initial_loss(), fit.final_loss(), sw_res));
            }

            let mut w = csv::Writer::from_path(run.out_dir().join(SWEEP)).or_fail()?;
            w.write_record([
                "tau",
                "k",
                "n_projections",
                "coverage_steps",
                "gp_coverage",
                "random_coverage",
                "initial_loss",
                "final_loss",
                "sw_ori_gen",
                "sw_ori_resampled",
            ])
            .or_fail()?;
            for &tau in &sw.taus {
                let kernel = KernelConfig {
                    tau,
                    ..cfg.kernel
                };
                for &k in &sw.ks {
                    let (gp, random) = coverage_comparison(
                        &real,
                        &points,
                        kernel,
                        k,
                        e.coverage.steps,
                        e.coverage.baseline_seed,
                    )?;
                    for &(m, l0, l1, sw_res) in &by_theta {
                        w.write_record([
                            tau.to_string(),
                            k.to_string(),
                            m.to_string(),
                            gp.steps.to_string(),
                            gp.final_rate().to_string(),
                            random.final_rate().to_string(),
                            l0.to_string(),
                            l1.to_string(),
                            sw_gen.to_string(),
                            sw_res.to_string(),
                        ])
                        .or_fail()?;
                    }
                }
            }
            w.flush().or_fail()?;
            Ok(StageOutput::files(&[SWEEP]))
        })
    }

    /// sample, generate, align, resample, evaluate.
    pub fn pipeline(&self) -> Result<(), PipelineError> {
        self.sample()?;
        self.generate()?;
        self.align()?;
        self.resample()?;
        self.evaluate()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n_real: usize,
    pub n_generated: Option<usize>,
    pub n_resampled: Option<usize>,
    pub sw_ori_gen: Option<f64>,
    pub sw_ori_resampled: Option<f64>,
    pub vocab_real: usize,
    pub vocab_generated: Option<usize>,
    pub vocab_resampled: Option<usize>,
    pub coverage_k: usize,
    pub coverage_steps: usize,
    pub gp_coverage: f64,
    pub random_coverage: f64,
}

/// Embedding rows of a resampled corpus, looked up through each record's
/// `parent_id` (or its own id for first copies).
fn rows_of_resampled(gen: &Corpus, gen_rows: &Matrix, picked: &Corpus) -> Result<Matrix, PipelineError> {
    let index: HashMap<&str, usize> = gen
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();
    let idx = picked
        .records()
        .iter()
        .map(|r| {
            let id = r.meta.get("parent_id").unwrap_or(&r.id);
            index.get(id.as_str()).copied().ok_or_else(|| {
                PipelineError::Failed(format!("resampled record `{}` has no generated parent", r.id))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(gen_rows.select_rows(&idx))
}

/// Coverage of the anchors picked by the uncertainty sampler against a
/// seeded uniform shuffle. The sampler runs in the full embedding space
/// with batches of `k`; coverage is measured on `points`. Both curves stop
/// at `steps` or when the sampler runs out of batches.
pub fn coverage_comparison(
    embeddings: &Matrix,
    points: &[Point2D],
    kernel: KernelConfig,
    k: usize,
    steps: usize,
    baseline_seed: u64,
) -> Result<(CoverageReport, CoverageReport), PipelineError> {
    let mut tracker = TrackerState::new(embeddings.clone(), kernel).or_fail()?;
    let gp_order: Vec<usize> = tracker
        .take_rounds(k, steps)
        .or_fail()?
        .iter()
        .map(|b| b.anchor)
        .collect();
    if gp_order.is_empty() {
        return Err(PipelineError::Failed(format!(
            "fewer than {k} points, no coverage step possible"
        )));
    }
    let steps = gp_order.len();
    let mut random_order: Vec<usize> = (0..points.len()).collect();
    random_order.shuffle(&mut ChaCha8Rng::seed_from_u64(baseline_seed));
    let gp = coverage_curve(points, &gp_order, k, steps).or_fail()?;
    let random = coverage_curve(points, &random_order, k, steps).or_fail()?;
    Ok((gp, random))
}
