//! Two-stage prompting: summarise demonstrations into attribute values,
//! then generate labelled samples that follow the summary.

mod client;
mod round;
mod schema;
mod summary;
mod template;

use thiserror::Error;

pub use client::{
    prompt_key, Completion, DecodeParams, GeneratorClient, HttpClient, HttpClientConfig,
    MockClient, Usage,
};
pub use round::{
    run_generation_round, run_generation_rounds, summary_id, GenerationOptions, RoundOutput,
    RoundReport,
};
pub use schema::AttributeSchema;
pub use summary::{
    parse_attribute_summary, parse_generated_samples, read_summaries, write_summaries,
    AttributeSummary,
};
pub use template::{
    build_generation_prompt, build_summary_prompt, PromptTemplate, PromptTemplates, Stage,
};

#[derive(Debug, Error)]
pub enum ReasoningError {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("{stage} template is missing the {{{placeholder}}} placeholder")]
    MissingPlaceholder { stage: Stage, placeholder: String },
    #[error("expected a {expected} template, got {found}")]
    WrongStage { expected: Stage, found: Stage },
    #[error("no demonstrations given")]
    NoDemonstrations,
    #[error("{0}")]
    InvalidOption(String),
    #[error("response contains no JSON object")]
    NoObject,
    #[error("response is missing attribute `{0}`")]
    MissingAttribute(String),
    #[error("attribute `{0}` has an empty value")]
    EmptyValue(String),
    #[error("response contains no samples")]
    NoSamples,
    #[error("batch member {0} is not in the corpus")]
    UnknownMember(usize),
    #[error("no usable response after {attempts} attempts: {last}")]
    RetriesExhausted {
        attempts: usize,
        last: Box<ReasoningError>,
    },
    #[error("generator request failed: {0}")]
    Http(String),
    #[error("{0}")]
    Io(String),
}
