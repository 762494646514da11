use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AttributeSchema, AttributeSummary, ReasoningError};
use crate::corpus_io::TextRecord;

const DEFAULT_SUMMARIZE: &str = include_str!("../../templates/summarize.txt");
const DEFAULT_GENERATE: &str = include_str!("../../templates/generate.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Summarize,
    Generate,
}

impl Stage {
    /// Placeholders a template for this stage must contain.
    pub fn required(self) -> &'static [&'static str] {
        match self {
            Stage::Summarize => &["demonstrations", "attributes", "label"],
            Stage::Generate => &["summary", "label", "n_samples"],
        }
    }

    /// Placeholders substituted for this stage; other braces are left alone.
    fn known(self) -> &'static [&'static str] {
        match self {
            Stage::Summarize => &["demonstrations", "attributes", "label", "dataset"],
            Stage::Generate => &["summary", "label", "n_samples", "dataset"],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Summarize => "summarize",
            Stage::Generate => "generate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    stage: Stage,
    text: String,
}

impl PromptTemplate {
    pub fn new(stage: Stage, text: impl Into<String>) -> Result<Self, ReasoningError> {
        let text = text.into();
        for name in stage.required() {
            if !text.contains(&format!("{{{name}}}")) {
                return Err(ReasoningError::MissingPlaceholder {
                    stage,
                    placeholder: (*name).to_string(),
                });
            }
        }
        Ok(Self { stage, text })
    }

    pub fn from_file(stage: Stage, path: impl AsRef<Path>) -> Result<Self, ReasoningError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ReasoningError::Io(format!("{}: {e}", path.display())))?;
        Self::new(stage, text)
    }

    pub fn default_summarize() -> Self {
        Self::new(Stage::Summarize, DEFAULT_SUMMARIZE).expect("bundled template is valid")
    }

    pub fn default_generate() -> Self {
        Self::new(Stage::Generate, DEFAULT_GENERATE).expect("bundled template is valid")
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Single left-to-right pass; substituted values are never rescanned.
    fn fill(&self, values: &[(&str, &str)]) -> String {
        let known = self.stage.known();
        let mut out = String::with_capacity(self.text.len() * 2);
        let mut rest = self.text.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let hit = after.find('}').and_then(|close| {
                let name = &after[..close];
                if !known.contains(&name) {
                    return None;
                }
                let value = values.iter().find(|(k, _)| *k == name)?.1;
                Some((value, close))
            });
            match hit {
                Some((value, close)) => {
                    out.push_str(value);
                    rest = &after[close + 1..];
                }
                None => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        out
    }
}

/// Both stage templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub summarize: PromptTemplate,
    pub generate: PromptTemplate,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            summarize: PromptTemplate::default_summarize(),
            generate: PromptTemplate::default_generate(),
        }
    }
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Stage-1 prompt asking for one value per schema attribute for `label`.
pub fn build_summary_prompt(
    demos: &[&TextRecord],
    schema: &AttributeSchema,
    label: &str,
    template: &PromptTemplate,
) -> Result<String, ReasoningError> {
    if template.stage != Stage::Summarize {
        return Err(ReasoningError::WrongStage {
            expected: Stage::Summarize,
            found: template.stage,
        });
    }
    if demos.is_empty() {
        return Err(ReasoningError::NoDemonstrations);
    }
    let demonstrations = demos
        .iter()
        .enumerate()
        .map(|(i, r)| format!("Example {} (label: {}): {}", i + 1, r.label, one_line(&r.text)))
        .collect::<Vec<_>>()
        .join("\n");
    let attributes = schema
        .attributes()
        .iter()
        .map(|a| format!("- {a}"))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(template.fill(&[
        ("demonstrations", &demonstrations),
        ("attributes", &attributes),
        ("label", label),
        ("dataset", schema.dataset_name()),
    ]))
}

/// Stage-2 prompt asking for `n_samples` samples that follow `summary`.
pub fn build_generation_prompt(
    summary: &AttributeSummary,
    dataset: &str,
    n_samples: usize,
    template: &PromptTemplate,
) -> Result<String, ReasoningError> {
    if template.stage != Stage::Generate {
        return Err(ReasoningError::WrongStage {
            expected: Stage::Generate,
            found: template.stage,
        });
    }
    if n_samples == 0 {
        return Err(ReasoningError::InvalidOption("n_samples must be at least 1".into()));
    }
    let pairs = summary
        .pairs
        .iter()
        .map(|(a, v)| format!("- {a}: {}", one_line(v)))
        .collect::<Vec<_>>()
        .join("\n");
    let n = n_samples.to_string();
    Ok(template.fill(&[
        ("summary", &pairs),
        ("label", &summary.label),
        ("n_samples", &n),
        ("dataset", dataset),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(label: &str) -> AttributeSummary {
        AttributeSummary {
            id: "s0-0".into(),
            pairs: vec![("Topics".into(), "acting".into())],
            demo_ids: vec!["r1".into()],
            label: label.into(),
        }
    }

    #[test]
    fn missing_placeholder_is_named() {
        let err = PromptTemplate::new(Stage::Generate, "{summary} {label}").unwrap_err();
        assert!(err.to_string().contains("n_samples"), "{err}");
    }

    #[test]
    fn single_demo_and_attribute_verbatim() {
        let schema = AttributeSchema::new("toy", vec!["Tone".into()]).unwrap();
        let r = TextRecord::new("r1", "a quietly moving film", "positive");
        let p = build_summary_prompt(&[&r], &schema, "positive", &PromptTemplate::default_summarize())
            .unwrap();
        assert!(p.contains("a quietly moving film"));
        assert!(p.contains("- Tone"));
        let again =
            build_summary_prompt(&[&r], &schema, "positive", &PromptTemplate::default_summarize())
                .unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn amazon_attributes_in_order() {
        let schema = AttributeSchema::builtin("amazon").unwrap();
        let r = TextRecord::new("r1", "works fine", "positive");
        let p = build_summary_prompt(&[&r], &schema, "positive", &PromptTemplate::default_summarize())
            .unwrap();
        let listed: Vec<&str> = p
            .lines()
            .filter_map(|l| l.strip_prefix("- "))
            .collect();
        assert_eq!(listed, schema.attributes());
    }

    #[test]
    fn substituted_text_is_not_rescanned() {
        let schema = AttributeSchema::new("toy", vec!["Tone".into()]).unwrap();
        let r = TextRecord::new("r1", "literal {label} and {x}", "neg");
        let p = build_summary_prompt(&[&r], &schema, "neg", &PromptTemplate::default_summarize())
            .unwrap();
        assert!(p.contains("literal {label} and {x}"));
    }

    #[test]
    fn generation_prompt_contents() {
        let t = PromptTemplate::default_generate();
        let p = build_generation_prompt(&summary("positive"), "amazon", 1, &t).unwrap();
        assert!(p.contains("Number of samples: 1\n"));
        assert!(p.contains("\"positive\""));
        assert!(p.contains("- Topics: acting"));
        assert!(p.contains("similar products while ensuring diversity"));
        assert!(build_generation_prompt(&summary("p"), "x", 0, &t).is_err());
    }

    #[test]
    fn stage_mismatch() {
        let t = PromptTemplate::default_summarize();
        assert!(build_generation_prompt(&summary("p"), "x", 1, &t).is_err());
    }
}
