use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{whitespace_tokenize, Backend, BackendError, Prompt, TokenDistribution};

/// One scripted context of a mock script file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedContext {
    pub prompt: String,
    #[serde(default)]
    pub prefix: Vec<String>,
    pub tokens: BTreeMap<String, f64>,
    /// Omitted means "whatever the tokens leave".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

/// Mock script file: scripted next-token tables keyed by prompt and prefix.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default = "default_mock_id")]
    pub backend_id: String,
    #[serde(default = "default_strict")]
    pub strict: bool,
    #[serde(default)]
    pub contexts: Vec<ScriptedContext>,
    /// Explicit tokenizations; other surfaces split at whitespace.
    #[serde(default)]
    pub tokenizations: BTreeMap<String, Vec<String>>,
}

fn default_mock_id() -> String {
    "mock".into()
}

fn default_strict() -> bool {
    true
}

/// Deterministic backend answering from a script.
///
/// In strict mode an unscripted context is an error; otherwise it answers
/// with a distribution that itemizes nothing.
#[derive(Debug, Clone)]
pub struct MockBackend {
    id: String,
    strict: bool,
    table: BTreeMap<(String, Vec<String>), TokenDistribution>,
    tokenizations: BTreeMap<String, Vec<String>>,
}

impl MockBackend {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            strict: true,
            table: BTreeMap::new(),
            tokenizations: BTreeMap::new(),
        }
    }

    pub fn lenient(mut self) -> Self {
        self.strict = false;
        self
    }

    pub fn from_script(script: MockScript) -> Result<Self, BackendError> {
        let mut backend = Self::new(script.backend_id);
        backend.strict = script.strict;
        backend.tokenizations = script.tokenizations;
        for ctx in script.contexts {
            let dist = match ctx.residual {
                Some(r) => TokenDistribution::new(ctx.tokens, r)?,
                None => TokenDistribution::from_probs(ctx.tokens)?,
            };
            backend.table.insert((ctx.prompt, ctx.prefix), dist);
        }
        Ok(backend)
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let script: MockScript =
            serde_json::from_str(text).map_err(|e| BackendError::Script(e.to_string()))?;
        Self::from_script(script)
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Script(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Scripts the distribution after `prompt` followed by `prefix`.
    pub fn script<P, S>(&mut self, prompt: &str, prefix: P, dist: TokenDistribution) -> &mut Self
    where
        P: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.table.insert(
            (
                prompt.to_string(),
                prefix.into_iter().map(Into::into).collect(),
            ),
            dist,
        );
        self
    }

    pub fn tokenization(&mut self, surface: &str, tokens: &[&str]) -> &mut Self {
        self.tokenizations.insert(
            surface.to_string(),
            tokens.iter().map(|t| t.to_string()).collect(),
        );
        self
    }

    /// Serializable form of this backend.
    pub fn to_script(&self) -> MockScript {
        MockScript {
            backend_id: self.id.clone(),
            strict: self.strict,
            contexts: self
                .table
                .iter()
                .map(|((prompt, prefix), d)| ScriptedContext {
                    prompt: prompt.clone(),
                    prefix: prefix.clone(),
                    tokens: d.entries().clone(),
                    residual: Some(d.residual()),
                })
                .collect(),
            tokenizations: self.tokenizations.clone(),
        }
    }
}

impl Backend for MockBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn next_token_distribution(
        &self,
        prompt: &Prompt,
        prefix: &[String],
    ) -> Result<TokenDistribution, BackendError> {
        match self.table.get(&(prompt.text.clone(), prefix.to_vec())) {
            Some(d) => Ok(d.clone()),
            None if self.strict => Err(BackendError::Unscripted {
                prompt: prompt.text.clone(),
                prefix: prefix.to_vec(),
            }),
            None => Ok(TokenDistribution::unknown()),
        }
    }

    fn tokenize(&self, surface: &str) -> Result<Vec<String>, BackendError> {
        Ok(self
            .tokenizations
            .get(surface)
            .cloned()
            .unwrap_or_else(|| whitespace_tokenize(surface)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: &str = "Is it the case that P?";

    #[test]
    fn scripted_lookup() {
        let backend = MockBackend::from_json(
            r#"{"contexts":[{"prompt":"Is it the case that P?","tokens":{"yes":0.6,"no":0.2,"maybe":0.1},"residual":0.1}]}"#,
        )
        .unwrap();
        let p = Prompt::new(Q, "default").unwrap();
        let d = backend.next_token_distribution(&p, &[]).unwrap();
        assert_eq!(d.get("yes"), Some(0.6));
        assert_eq!(d.get("no"), Some(0.2));
        assert_eq!(d.get("maybe"), Some(0.1));
        assert_eq!(d.residual(), 0.1);
    }

    #[test]
    fn strictness() {
        let p = Prompt::new(Q, "default").unwrap();
        let strict = MockBackend::new("m");
        assert!(matches!(
            strict.next_token_distribution(&p, &[]),
            Err(BackendError::Unscripted { .. })
        ));
        let lenient = MockBackend::new("m").lenient();
        assert_eq!(
            lenient.next_token_distribution(&p, &[]).unwrap().residual(),
            1.0
        );
    }

    #[test]
    fn bad_script_rejected() {
        assert!(matches!(
            MockBackend::from_json(r#"{"contexts":[{"prompt":"x","tokens":{"yes":1.2}}]}"#),
            Err(BackendError::Normalization(_))
        ));
        assert!(matches!(
            MockBackend::from_json("{"),
            Err(BackendError::Script(_))
        ));
    }

    #[test]
    fn script_roundtrip_reproduces_answers() {
        let mut m = MockBackend::new("m");
        m.script(
            Q,
            Vec::<String>::new(),
            TokenDistribution::from_probs([("yes", 0.3)]).unwrap(),
        )
        .script(
            Q,
            ["of"],
            TokenDistribution::from_probs([(" course", 0.5)]).unwrap(),
        )
        .tokenization("of course", &["of", " course"]);
        let again = MockBackend::from_script(
            serde_json::from_str(&serde_json::to_string(&m.to_script()).unwrap()).unwrap(),
        )
        .unwrap();
        let p = Prompt::new(Q, "default").unwrap();
        for prefix in [vec![], vec!["of".to_string()]] {
            assert_eq!(
                m.next_token_distribution(&p, &prefix).unwrap(),
                again.next_token_distribution(&p, &prefix).unwrap()
            );
        }
        assert_eq!(again.tokenize("of course").unwrap(), vec!["of", " course"]);
    }
}
