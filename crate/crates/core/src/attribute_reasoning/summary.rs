use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AttributeSchema, ReasoningError};
use crate::corpus_io::TextRecord;

/// Attribute values extracted for one (demonstration batch, label) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSummary {
    pub id: String,
    /// `(attribute, value)` in schema order.
    pub pairs: Vec<(String, String)>,
    pub demo_ids: Vec<String>,
    pub label: String,
}

impl AttributeSummary {
    pub fn value(&self, attribute: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(a, _)| a == attribute)
            .map(|(_, v)| v.as_str())
    }
}

/// First JSON value of the wanted shape starting at some `open` byte.
fn first_json(response: &str, open: char, want: fn(&Value) -> bool) -> Option<Value> {
    for (i, _) in response.match_indices(open) {
        let mut stream = serde_json::Deserializer::from_str(&response[i..]).into_iter::<Value>();
        if let Some(Ok(v)) = stream.next() {
            if want(&v) {
                return Some(v);
            }
        }
    }
    None
}

fn value_text(v: &Value) -> Option<String> {
    let s = match v {
        Value::String(s) => s.trim().to_string(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) => items
            .iter()
            .filter_map(value_text)
            .collect::<Vec<_>>()
            .join(", "),
        Value::Null | Value::Object(_) => return None,
    };
    (!s.is_empty()).then_some(s)
}

/// Pulls the first JSON object out of `response` (prose and code fences
/// around it are skipped) and checks it against `schema`. Keys match
/// attribute names case-insensitively; unknown keys are dropped with a
/// warning.
pub fn parse_attribute_summary(
    response: &str,
    schema: &AttributeSchema,
    id: impl Into<String>,
    label: impl Into<String>,
    demo_ids: Vec<String>,
) -> Result<AttributeSummary, ReasoningError> {
    let Some(Value::Object(map)) = first_json(response, '{', Value::is_object) else {
        return Err(ReasoningError::NoObject);
    };
    let norm = |s: &str| s.trim().to_lowercase();
    for key in map.keys() {
        if !schema.attributes().iter().any(|a| norm(a) == norm(key)) {
            log::warn!("dropping attribute `{key}` not in schema");
        }
    }
    let mut pairs = Vec::with_capacity(schema.len());
    for attr in schema.attributes() {
        let value = map
            .iter()
            .find(|(k, _)| norm(k) == norm(attr))
            .map(|(_, v)| v)
            .ok_or_else(|| ReasoningError::MissingAttribute(attr.clone()))?;
        let text = value_text(value).ok_or_else(|| ReasoningError::EmptyValue(attr.clone()))?;
        pairs.push((attr.clone(), text));
    }
    Ok(AttributeSummary {
        id: id.into(),
        pairs,
        demo_ids,
        label: label.into(),
    })
}

fn numbered_item(line: &str) -> Option<&str> {
    let t = line.trim_start();
    let digits = t.len() - t.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return None;
    }
    let rest = t[digits..].strip_prefix(['.', ')'])?;
    if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
        return None;
    }
    Some(rest.trim())
}

fn strip_quotes(s: &str) -> &str {
    let s = s.trim();
    for (open, close) in [('"', '"'), ('\u{201c}', '\u{201d}')] {
        if let Some(inner) = s.strip_prefix(open).and_then(|r| r.strip_suffix(close)) {
            return inner.trim();
        }
    }
    s
}

fn split_samples(response: &str) -> Vec<String> {
    let is_sample_array = |v: &Value| {
        v.as_array().is_some_and(|a| {
            !a.is_empty() && a.iter().all(|x| x.is_string() || x.get("text").is_some_and(Value::is_string))
        })
    };
    if let Some(Value::Array(items)) = first_json(response, '[', is_sample_array) {
        return items
            .iter()
            .filter_map(|x| x.as_str().or_else(|| x.get("text").and_then(Value::as_str)))
            .map(|s| s.trim().to_string())
            .collect();
    }
    let mut items: Vec<String> = Vec::new();
    let mut in_list = false;
    for line in response.lines() {
        if let Some(start) = numbered_item(line) {
            items.push(start.to_string());
            in_list = true;
        } else if line.trim().is_empty() {
            in_list = false;
        } else if in_list {
            let last = items.last_mut().expect("in_list implies an item");
            last.push(' ');
            last.push_str(line.trim());
        }
    }
    items.iter().map(|s| strip_quotes(s).to_string()).collect()
}

/// Splits a Stage-2 response (JSON array or numbered list) into synthetic
/// records conditioned on `summary`. Blank samples are dropped.
pub fn parse_generated_samples(
    response: &str,
    summary: &AttributeSummary,
) -> Result<Vec<TextRecord>, ReasoningError> {
    let records: Vec<TextRecord> = split_samples(response)
        .into_iter()
        .filter(|s| !s.trim().is_empty())
        .enumerate()
        .map(|(j, text)| {
            TextRecord::synthetic(format!("{}-{j}", summary.id), text, summary.label.clone())
                .with_meta("summary_id", summary.id.clone())
        })
        .collect();
    if records.is_empty() {
        return Err(ReasoningError::NoSamples);
    }
    Ok(records)
}

pub fn write_summaries(
    path: impl AsRef<Path>,
    summaries: &[AttributeSummary],
) -> Result<(), ReasoningError> {
    let path = path.as_ref();
    let io = |e: std::io::Error| ReasoningError::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for s in summaries {
        let line = serde_json::to_string(s).expect("summaries always serialize");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_summaries(path: impl AsRef<Path>) -> Result<Vec<AttributeSummary>, ReasoningError> {
    let path = path.as_ref();
    let io = |e: std::io::Error| ReasoningError::Io(format!("{}: {e}", path.display()));
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let s = serde_json::from_str(&line).map_err(|e| {
            ReasoningError::Io(format!("{}: line {}: {e}", path.display(), i + 1))
        })?;
        out.push(s);
    }
    Ok(out)
}
