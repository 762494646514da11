use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ReasoningError;
use crate::corpus_io::{fnv1a64, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl DecodeParams {
    pub const SUMMARIZE: Self = Self {
        temperature: 0.2,
        max_tokens: None,
    };
    pub const GENERATE: Self = Self {
        temperature: 1.0,
        max_tokens: None,
    };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl std::ops::AddAssign for Usage {
    fn add_assign(&mut self, rhs: Self) {
        self.prompt_tokens += rhs.prompt_tokens;
        self.completion_tokens += rhs.completion_tokens;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    /// Token counts when the backend reports them.
    pub usage: Option<Usage>,
}

pub trait GeneratorClient: Sync {
    fn complete(&self, prompt: &str, params: &DecodeParams) -> Result<Completion, ReasoningError>;
}

/// Key used by [`MockClient`] fixture tables.
pub fn prompt_key(prompt: &str) -> String {
    format!("{:016x}", fnv1a64(prompt.as_bytes()))
}

#[derive(Deserialize)]
struct FixtureEntry {
    prompt: Option<String>,
    prompt_hash: Option<String>,
    response: String,
}

/// Offline client. Prompts found in the fixture table get the stored
/// response; any other prompt gets a canned answer synthesised from the
/// prompt itself. Both paths depend only on the table and the prompt.
#[derive(Debug, Clone, Default)]
pub struct MockClient {
    fixtures: HashMap<String, String>,
}

impl MockClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_response(mut self, prompt: &str, response: impl Into<String>) -> Self {
        self.fixtures.insert(prompt_key(prompt), response.into());
        self
    }

    /// Reads a JSONL table of `{"prompt" | "prompt_hash", "response"}`.
    pub fn from_fixture_file(path: impl AsRef<Path>) -> Result<Self, ReasoningError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ReasoningError::Io(format!("{}: {e}", path.display())))?;
        let mut fixtures = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| ReasoningError::Io(format!("{}: line {}: {msg}", path.display(), i + 1));
            let entry: FixtureEntry = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            let key = match (entry.prompt, entry.prompt_hash) {
                (Some(p), _) => prompt_key(&p),
                (None, Some(h)) => h.to_lowercase(),
                (None, None) => return Err(bad("entry needs `prompt` or `prompt_hash`".into())),
            };
            fixtures.insert(key, entry.response);
        }
        Ok(Self { fixtures })
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }
}

impl GeneratorClient for MockClient {
    fn complete(&self, prompt: &str, _params: &DecodeParams) -> Result<Completion, ReasoningError> {
        let text = match self.fixtures.get(&prompt_key(prompt)) {
            Some(r) => r.clone(),
            None => synthesize(prompt),
        };
        Ok(Completion { text, usage: None })
    }
}

fn block_after<'a>(prompt: &'a str, heading: &str) -> Vec<&'a str> {
    prompt
        .lines()
        .skip_while(|l| l.trim() != heading)
        .skip(1)
        .map_while(|l| l.strip_prefix("- "))
        .collect()
}

fn line_value<'a>(prompt: &'a str, prefix: &str) -> Option<&'a str> {
    prompt.lines().find_map(|l| l.strip_prefix(prefix)).map(str::trim)
}

fn sentence(rng: &mut ChaCha8Rng, pool: &[String], len: usize) -> String {
    let words: Vec<&str> = (0..len)
        .filter_map(|_| pool.choose(rng).map(String::as_str))
        .collect();
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

/// Canned answer for prompts laid out like the bundled templates.
fn synthesize(prompt: &str) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a64(prompt.as_bytes()));
    if let Some(n) = line_value(prompt, "Number of samples:").and_then(|n| n.parse::<usize>().ok()) {
        let label = line_value(prompt, "Label:").unwrap_or("");
        let mut pool: Vec<String> = block_after(prompt, "Attribute summary:")
            .iter()
            .filter_map(|l| l.split_once(':').map(|(_, v)| v))
            .flat_map(tokenize)
            .collect();
        pool.extend(tokenize(label));
        if pool.is_empty() {
            return "No content.".into();
        }
        return (1..=n)
            .map(|j| {
                let len = rng.random_range(6..=14);
                format!("{j}. {}", sentence(&mut rng, &pool, len))
            })
            .collect::<Vec<_>>()
            .join("\n");
    }
    let attributes = block_after(prompt, "Attributes:");
    if !attributes.is_empty() {
        let pool: Vec<String> = prompt
            .lines()
            .filter(|l| l.starts_with("Example "))
            .filter_map(|l| l.split_once("): ").map(|(_, t)| t))
            .flat_map(tokenize)
            .collect();
        let mut obj = serde_json::Map::new();
        for a in attributes {
            let value = if pool.is_empty() {
                "unspecified".to_string()
            } else {
                let len = rng.random_range(2..=4);
                (0..len)
                    .filter_map(|_| pool.choose(&mut rng).cloned())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            obj.insert(a.to_string(), Value::String(value));
        }
        return format!("```json\n{}\n```", Value::Object(obj));
    }
    "I am not sure what you are asking for.".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpClientConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Extra attempts after a 429, a 5xx or a transport error.
    pub max_retries: u32,
    /// First backoff delay, doubled per attempt, plus up to 50% jitter.
    pub backoff_base: Duration,
}

impl HttpClientConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: std::env::var("GENERATOR_API_KEY").ok(),
            timeout: Duration::from_secs(120),
            max_retries: 3,
            backoff_base: Duration::from_secs(1),
        }
    }
}

/// Blocking client for an OpenAI-style `chat/completions` endpoint.
pub struct HttpClient {
    config: HttpClientConfig,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(config: HttpClientConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'))
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let base = self.config.backoff_base.mul_f64(2f64.powi(attempt as i32));
        base.mul_f64(1.0 + rand::rng().random_range(0.0..0.5))
    }

    fn attempt(&self, body: &Value) -> Result<Result<Completion, ReasoningError>, String> {
        let mut req = self.agent.post(&self.url());
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(e) => return Err(e.to_string()),
        };
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        if status == 429 || status >= 500 {
            return Err(format!("HTTP {status}: {text}"));
        }
        if status >= 400 {
            return Ok(Err(ReasoningError::Http(format!("HTTP {status}: {text}"))));
        }
        Ok(parse_chat_response(&text))
    }
}

fn parse_chat_response(body: &str) -> Result<Completion, ReasoningError> {
    let v: Value = serde_json::from_str(body)
        .map_err(|e| ReasoningError::Http(format!("response is not JSON: {e}")))?;
    let text = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ReasoningError::Http("response has no choices[0].message.content".into()))?
        .to_string();
    let usage = v.get("usage").map(|u| Usage {
        prompt_tokens: u.get("prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: u.get("completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    });
    Ok(Completion { text, usage })
}

impl GeneratorClient for HttpClient {
    fn complete(&self, prompt: &str, params: &DecodeParams) -> Result<Completion, ReasoningError> {
        let mut body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
        });
        if let Some(max) = params.max_tokens {
            body["max_tokens"] = json!(max);
        }
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let wait = self.backoff(attempt - 1);
                log::warn!("retrying in {wait:?} after: {last}");
                std::thread::sleep(wait);
            }
            match self.attempt(&body) {
                Ok(result) => return result,
                Err(e) => last = e,
            }
        }
        Err(ReasoningError::Http(format!(
            "gave up after {} attempts: {last}",
            self.config.max_retries + 1
        )))
    }
}
