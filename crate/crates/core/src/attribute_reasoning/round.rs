use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    build_generation_prompt, build_summary_prompt, parse_attribute_summary,
    parse_generated_samples, AttributeSchema, AttributeSummary, DecodeParams, GeneratorClient,
    PromptTemplates, ReasoningError, Usage,
};
use crate::corpus_io::{Corpus, TextRecord};
use crate::gp_sampler::DemonstrationBatch;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationOptions {
    /// Samples requested per summary.
    pub n_samples: usize,
    /// Re-asks allowed per stage when a response does not parse.
    pub retries: usize,
    /// Rounds processed concurrently.
    pub max_in_flight: usize,
    pub summarize_params: DecodeParams,
    pub generate_params: DecodeParams,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            n_samples: 10,
            retries: 2,
            max_in_flight: 4,
            summarize_params: DecodeParams::SUMMARIZE,
            generate_params: DecodeParams::GENERATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutput {
    pub summary: AttributeSummary,
    pub records: Vec<TextRecord>,
    pub usage: Usage,
}

/// Outcome of one (batch, label) round.
#[derive(Debug)]
pub struct RoundReport {
    pub round: usize,
    pub label: String,
    pub outcome: Result<RoundOutput, ReasoningError>,
}

pub fn summary_id(round: usize, label_index: usize) -> String {
    format!("s{round}-{label_index}")
}

fn ask<T>(
    client: &dyn GeneratorClient,
    prompt: &str,
    params: &DecodeParams,
    retries: usize,
    reminder: &str,
    usage: &mut Usage,
    parse: impl Fn(&str) -> Result<T, ReasoningError>,
) -> Result<T, ReasoningError> {
    let mut last = None;
    for attempt in 0..=retries {
        let text = if attempt == 0 {
            prompt.to_string()
        } else {
            format!("{prompt}\n\n{reminder}")
        };
        let completion = client.complete(&text, params)?;
        if let Some(u) = completion.usage {
            *usage += u;
        }
        match parse(&completion.text) {
            Ok(v) => return Ok(v),
            Err(e) => {
                log::debug!("attempt {} did not parse: {e}", attempt + 1);
                last = Some(e);
            }
        }
    }
    Err(ReasoningError::RetriesExhausted {
        attempts: retries + 1,
        last: Box::new(last.expect("at least one attempt")),
    })
}

/// Summarises `batch` for `label`, then generates samples from the summary.
/// Each stage is re-asked with a format reminder up to `opts.retries` times.
#[allow(clippy::too_many_arguments)]
pub fn run_generation_round(
    client: &dyn GeneratorClient,
    batch: &DemonstrationBatch,
    corpus: &Corpus,
    schema: &AttributeSchema,
    templates: &PromptTemplates,
    opts: &GenerationOptions,
    label: &str,
    summary_id: &str,
) -> Result<RoundOutput, ReasoningError> {
    let demos = batch
        .members
        .iter()
        .map(|&i| corpus.get(i).ok_or(ReasoningError::UnknownMember(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let demo_ids: Vec<String> = demos.iter().map(|r| r.id.clone()).collect();
    let mut usage = Usage::default();

    let prompt = build_summary_prompt(&demos, schema, label, &templates.summarize)?;
    let keys = schema.attributes().join(", ");
    let reminder = format!(
        "Your previous answer could not be read. Reply with one JSON object only, with exactly these keys: {keys}."
    );
    let summary = ask(client, &prompt, &opts.summarize_params, opts.retries, &reminder, &mut usage, |r| {
        parse_attribute_summary(r, schema, summary_id, label, demo_ids.clone())
    })?;

    let prompt = build_generation_prompt(&summary, schema.dataset_name(), opts.n_samples, &templates.generate)?;
    let reminder = format!(
        "Your previous answer could not be read. Reply with a numbered list of {} samples only.",
        opts.n_samples
    );
    let records = ask(client, &prompt, &opts.generate_params, opts.retries, &reminder, &mut usage, |r| {
        parse_generated_samples(r, &summary)
    })?;
    Ok(RoundOutput {
        summary,
        records,
        usage,
    })
}

/// One round per (batch, label in the corpus label set), run on up to
/// `opts.max_in_flight` threads. Reports come back in batch order, then
/// label-set order, whatever order they finished in.
pub fn run_generation_rounds(
    client: &dyn GeneratorClient,
    batches: &[DemonstrationBatch],
    corpus: &Corpus,
    schema: &AttributeSchema,
    templates: &PromptTemplates,
    opts: &GenerationOptions,
) -> Vec<RoundReport> {
    let jobs: Vec<(usize, &DemonstrationBatch, usize, &str)> = batches
        .iter()
        .enumerate()
        .flat_map(|(pos, b)| {
            corpus
                .label_set()
                .iter()
                .enumerate()
                .map(move |(li, l)| (pos, b, li, l.as_str()))
        })
        .collect();
    let slots: Vec<Mutex<Option<RoundReport>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = opts.max_in_flight.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(_, batch, li, label)) = jobs.get(j) else {
                    break;
                };
                let id = summary_id(batch.round, li);
                let outcome =
                    run_generation_round(client, batch, corpus, schema, templates, opts, label, &id);
                if let Err(e) = &outcome {
                    log::warn!("round {} label `{label}` failed: {e}", batch.round);
                }
                *slots[j].lock().expect("no panics while holding the lock") = Some(RoundReport {
                    round: batch.round,
                    label: label.to_string(),
                    outcome,
                });
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("lock not poisoned").expect("every job ran"))
        .collect()
}
