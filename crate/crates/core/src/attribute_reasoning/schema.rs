use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ReasoningError;

/// Dataset name plus the ordered attributes a summary must describe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    dataset_name: String,
    attributes: Vec<String>,
}

impl AttributeSchema {
    pub fn new(
        dataset_name: impl Into<String>,
        attributes: Vec<String>,
    ) -> Result<Self, ReasoningError> {
        if attributes.is_empty() {
            return Err(ReasoningError::InvalidSchema(
                "schema needs at least one attribute".into(),
            ));
        }
        let mut seen = HashSet::new();
        for a in &attributes {
            if a.trim().is_empty() {
                return Err(ReasoningError::InvalidSchema(
                    "attribute names must be non-empty".into(),
                ));
            }
            if !seen.insert(a.to_lowercase()) {
                return Err(ReasoningError::InvalidSchema(format!(
                    "duplicate attribute `{a}`"
                )));
            }
        }
        Ok(Self {
            dataset_name: dataset_name.into(),
            attributes,
        })
    }

    /// Shipped schema for `sst2`, `agnews` or `amazon`.
    pub fn builtin(name: &str) -> Option<Self> {
        let attrs: &[&str] = match name.to_lowercase().as_str() {
            "sst2" | "sst-2" => &["Movie genres", "Topics", "Language habits", "Review length"],
            "agnews" | "ag_news" => &[
                "News topics",
                "Writing style",
                "News length",
                "Subtopics",
                "Location",
            ],
            "amazon" => &[
                "Product information",
                "Usage experience",
                "Writing style",
                "Review length",
                "Language habits",
                "Subtopics",
            ],
            _ => return None,
        };
        let attributes = attrs.iter().map(|s| s.to_string()).collect();
        Some(Self::new(name, attributes).expect("builtin schemas are valid"))
    }

    pub fn dataset_name(&self) -> &str {
        &self.dataset_name
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}
