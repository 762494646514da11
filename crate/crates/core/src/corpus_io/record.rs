use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("duplicate label `{0}` in label set")]
    DuplicateLabel(String),
    #[error("record `{0}` has empty text")]
    EmptyText(String),
    #[error("record `{id}` has label `{label}` which is not in the label set")]
    UnknownLabel { id: String, label: String },
    #[error("corpus file is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Real,
    Synthetic,
}

/// One labeled text sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRecord {
    pub id: String,
    pub text: String,
    pub label: String,
    #[serde(default)]
    pub source: Source,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

impl TextRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label: label.into(),
            source: Source::Real,
            meta: BTreeMap::new(),
        }
    }

    pub fn synthetic(
        id: impl Into<String>,
        text: impl Into<String>,
        label: impl Into<String>,
    ) -> Self {
        Self {
            source: Source::Synthetic,
            ..Self::new(id, text, label)
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }
}

/// Ordered, validated collection of records. Record order is the row order
/// of any embedding matrix bound to the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<TextRecord>,
    label_set: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    label_set: Vec<String>,
}

impl Corpus {
    /// Validates `records`. Without an explicit label set the sorted distinct
    /// labels of the records are used.
    pub fn new(
        records: Vec<TextRecord>,
        label_set: Option<Vec<String>>,
    ) -> Result<Self, CorpusError> {
        let label_set = match label_set {
            Some(labels) => {
                let mut seen = HashSet::new();
                for l in &labels {
                    if !seen.insert(l.as_str()) {
                        return Err(CorpusError::DuplicateLabel(l.clone()));
                    }
                }
                labels
            }
            None => records
                .iter()
                .map(|r| r.label.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        };
        let mut ids = HashSet::with_capacity(records.len());
        for r in &records {
            if !ids.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId(r.id.clone()));
            }
            if r.text.is_empty() {
                return Err(CorpusError::EmptyText(r.id.clone()));
            }
            if !label_set.contains(&r.label) {
                return Err(CorpusError::UnknownLabel {
                    id: r.id.clone(),
                    label: r.label.clone(),
                });
            }
        }
        Ok(Self { records, label_set })
    }

    pub fn records(&self) -> &[TextRecord] {
        &self.records
    }

    pub fn label_set(&self) -> &[String] {
        &self.label_set
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&TextRecord> {
        self.records.get(index)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.records.iter().position(|r| r.id == id)
    }

    pub fn texts(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.text.as_str()).collect()
    }

    pub fn into_records(self) -> Vec<TextRecord> {
        self.records
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);

    let mut label_set = None;
    let mut records = Vec::new();
    let mut saw_content = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let first = !saw_content;
        saw_content = true;
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        if first && value.get("label_set").is_some() && value.get("id").is_none() {
            let header: Header =
                serde_json::from_value(value).map_err(|e| CorpusError::Malformed {
                    line: line_no,
                    message: format!("bad header: {e}"),
                })?;
            label_set = Some(header.label_set);
            continue;
        }
        let record: TextRecord =
            serde_json::from_value(value).map_err(|e| CorpusError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    if !saw_content {
        return Err(CorpusError::Empty);
    }
    Corpus::new(records, label_set)
}

/// Writes the header line followed by one record per line.
pub fn save_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    let header = Header {
        label_set: corpus.label_set.clone(),
    };
    let to_line = |v: serde_json::Result<String>| v.expect("records always serialize");
    writeln!(w, "{}", to_line(serde_json::to_string(&header))).map_err(io_err)?;
    for r in &corpus.records {
        writeln!(w, "{}", to_line(serde_json::to_string(r))).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
