//! Next-token probability sources.
//!
//! A [`Backend`] answers "what comes after this prompt and this token prefix"
//! with an itemized head plus residual mass. Sequence probabilities are built
//! from those answers by the chain rule in [`sequence_probability`].

mod distribution;
mod http;
mod mock;
mod prompt;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use distribution::{TokenDistribution, EPS_NORM};
pub use http::HttpBackend;
pub use mock::{MockBackend, MockScript, ScriptedContext};
pub use prompt::{build_prompt, render, Prompt, PromptTemplate};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("distribution is not normalized: {0}")]
    Normalization(String),
    #[error("cannot render formula: {0}")]
    Unrenderable(String),
    #[error("prompt text is empty")]
    EmptyPrompt,
    #[error("unknown prompt template {0:?}")]
    UnknownTemplate(String),
    #[error("no scripted distribution for prompt {prompt:?} with prefix {prefix:?}")]
    Unscripted { prompt: String, prefix: Vec<String> },
    #[error("request for prompt {prompt_id} timed out")]
    Timeout { prompt_id: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed backend response: {0}")]
    Response(String),
    #[error("invalid mock script: {0}")]
    Script(String),
    #[error("invalid backend config: {0}")]
    Config(String),
    #[error("token sequence is empty")]
    EmptySequence,
}

/// A source of next-token distributions. Implementations must be safe to
/// share between probe workers.
pub trait Backend: Send + Sync {
    /// Identifier recorded in every probe made through this backend.
    fn id(&self) -> &str;

    /// Distribution of the token after `prompt` followed by `prefix`.
    fn next_token_distribution(
        &self,
        prompt: &Prompt,
        prefix: &[String],
    ) -> Result<TokenDistribution, BackendError>;

    /// Canonical tokenization of a surface string.
    fn tokenize(&self, surface: &str) -> Result<Vec<String>, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Arc<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn next_token_distribution(
        &self,
        prompt: &Prompt,
        prefix: &[String],
    ) -> Result<TokenDistribution, BackendError> {
        (**self).next_token_distribution(prompt, prefix)
    }

    fn tokenize(&self, surface: &str) -> Result<Vec<String>, BackendError> {
        (**self).tokenize(surface)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn next_token_distribution(
        &self,
        prompt: &Prompt,
        prefix: &[String],
    ) -> Result<TokenDistribution, BackendError> {
        (**self).next_token_distribution(prompt, prefix)
    }

    fn tokenize(&self, surface: &str) -> Result<Vec<String>, BackendError> {
        (**self).tokenize(surface)
    }
}

/// Splits at whitespace, keeping each word's leading whitespace attached:
/// `"I couldn't agree"` becomes `["I", " couldn't", " agree"]`.
pub fn whitespace_tokenize(surface: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut in_word = false;
    for ch in surface.chars() {
        if ch.is_whitespace() {
            if in_word {
                out.push(std::mem::take(&mut current));
                in_word = false;
            }
        } else {
            in_word = true;
        }
        current.push(ch);
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Chain-rule probability of a token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceProbability {
    /// Product of the itemized conditionals; a token missing from a truncated
    /// head contributes 0 here.
    pub value: f64,
    /// Product where each missing token contributes its head's residual.
    pub upper_bound: f64,
    /// Set when some factor came from truncated mass.
    pub approximate: bool,
}

/// `Π_i P(s_i | prompt, s_1..s_{i-1})` through repeated backend calls.
pub fn sequence_probability<B: Backend + ?Sized>(
    backend: &B,
    prompt: &Prompt,
    tokens: &[String],
) -> Result<SequenceProbability, BackendError> {
    if tokens.is_empty() {
        return Err(BackendError::EmptySequence);
    }
    let mut out = SequenceProbability {
        value: 1.0,
        upper_bound: 1.0,
        approximate: false,
    };
    for i in 0..tokens.len() {
        let dist = backend.next_token_distribution(prompt, &tokens[..i])?;
        match dist.get(&tokens[i]) {
            Some(p) => {
                out.value *= p;
                out.upper_bound *= p;
            }
            None if dist.is_truncated() => {
                out.value = 0.0;
                out.upper_bound *= dist.residual();
                out.approximate = true;
            }
            None => {
                out.value = 0.0;
                out.upper_bound = 0.0;
            }
        }
        if out.upper_bound == 0.0 {
            break;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

/// Request/response field names for the HTTP client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpFields {
    pub prompt: String,
    pub max_tokens: String,
    pub logprobs: String,
    /// JSON pointer to the next-position logprob list in the response.
    pub response_pointer: String,
    pub token: String,
    pub logprob: String,
}

impl Default for HttpFields {
    fn default() -> Self {
        Self {
            prompt: "prompt".into(),
            max_tokens: "max_tokens".into(),
            logprobs: "logprobs".into(),
            response_pointer: "/top_logprobs".into(),
            token: "token".into(),
            logprob: "logprob".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Overrides the backend's own identifier.
    pub id: Option<String>,
    pub endpoint: Option<String>,
    pub tokenize_endpoint: Option<String>,
    pub top_k: usize,
    pub timeout_ms: u64,
    pub max_parallel: usize,
    /// Name of the environment variable holding a bearer token.
    pub auth_env: Option<String>,
    pub mock_script: Option<PathBuf>,
    pub fields: HttpFields,
    pub extra_body: serde_json::Map<String, serde_json::Value>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            id: None,
            endpoint: None,
            tokenize_endpoint: None,
            top_k: 20,
            timeout_ms: 30_000,
            max_parallel: 4,
            auth_env: None,
            mock_script: None,
            fields: HttpFields::default(),
            extra_body: serde_json::Map::new(),
        }
    }
}

impl BackendConfig {
    /// Warning text when the requested head is too short to observe every
    /// lexicon entry.
    pub fn coverage_warning(&self, lexicon_size: usize) -> Option<String> {
        (self.top_k < lexicon_size).then(|| {
            format!(
                "top_k = {} is smaller than the {} lexicon entries; some assent or dissent mass may be unobservable",
                self.top_k, lexicon_size
            )
        })
    }

    /// The identifier the opened backend would report, without opening it.
    pub fn resolved_id(&self, base_dir: &Path) -> Result<String, BackendError> {
        if let Some(id) = &self.id {
            return Ok(id.clone());
        }
        match self.kind {
            BackendKind::Mock => Ok(self.open(base_dir)?.id().to_string()),
            BackendKind::Http => self
                .endpoint
                .as_ref()
                .map(|e| format!("http:{e}"))
                .ok_or_else(|| BackendError::Config("http backend needs an endpoint".into())),
        }
    }

    /// Opens the configured backend. Relative script paths resolve against
    /// `base_dir`.
    pub fn open(&self, base_dir: &Path) -> Result<Box<dyn Backend>, BackendError> {
        if self.top_k == 0 || self.max_parallel == 0 {
            return Err(BackendError::Config(
                "top_k and max_parallel must be positive".into(),
            ));
        }
        match self.kind {
            BackendKind::Mock => {
                let path = self
                    .mock_script
                    .as_ref()
                    .ok_or_else(|| BackendError::Config("mock backend needs mock_script".into()))?;
                let mut script: MockScript = {
                    let full = base_dir.join(path);
                    let text = std::fs::read_to_string(&full)
                        .map_err(|e| BackendError::Script(format!("{}: {e}", full.display())))?;
                    serde_json::from_str(&text).map_err(|e| BackendError::Script(e.to_string()))?
                };
                if let Some(id) = &self.id {
                    script.backend_id = id.clone();
                }
                Ok(Box::new(MockBackend::from_script(script)?))
            }
            BackendKind::Http => Ok(Box::new(HttpBackend::new(self.clone())?)),
        }
    }
}
