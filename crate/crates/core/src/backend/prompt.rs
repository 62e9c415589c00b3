use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BackendError;
use crate::logic::{AtomRegistry, Formula};

/// Conditioning text for a probe together with the template that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    pub template_id: String,
}

impl Prompt {
    pub fn new(
        text: impl Into<String>,
        template_id: impl Into<String>,
    ) -> Result<Self, BackendError> {
        let text = text.into();
        if text.is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        Ok(Self {
            text,
            template_id: template_id.into(),
        })
    }

    /// Short stable identifier used in error messages and logs.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.template_id.as_bytes());
        h.update([0]);
        h.update(self.text.as_bytes());
        let digest = h.finalize();
        let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
        format!("{}:{hex}", self.template_id)
    }
}

/// Question templates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptTemplate {
    /// `Is it the case that <p>?`
    #[default]
    Default,
    /// The default question followed by an instruction to answer yes or no.
    ForceBinary,
}

impl PromptTemplate {
    pub fn id(self) -> &'static str {
        match self {
            PromptTemplate::Default => "default",
            PromptTemplate::ForceBinary => "force-binary",
        }
    }

    pub fn apply(self, sentence: &str) -> String {
        match self {
            PromptTemplate::Default => format!("Is it the case that {sentence}?"),
            PromptTemplate::ForceBinary => {
                format!("Is it the case that {sentence}? Answer yes or no.")
            }
        }
    }
}

impl fmt::Display for PromptTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PromptTemplate {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(PromptTemplate::Default),
            "force-binary" => Ok(PromptTemplate::ForceBinary),
            other => Err(BackendError::UnknownTemplate(other.to_string())),
        }
    }
}

fn clause(f: &Formula) -> String {
    if f.is_binary() {
        format!(", {},", sentence(f))
    } else {
        sentence(f)
    }
}

fn sentence(f: &Formula) -> String {
    match f {
        Formula::Atom { surface, .. } => surface.clone(),
        Formula::Not(g) => format!("it is not the case that {}", clause(g)),
        Formula::And(a, b) => format!("{} and {}", clause(a), clause(b)),
        Formula::Or(a, b) => format!("{} or {}", clause(a), clause(b)),
        Formula::Implies(a, b) => format!("if {} then {}", clause(a), clause(b)),
    }
}

/// English rendering of a formula. Parenthesized subformulas become comma
/// clauses.
pub fn render(f: &Formula) -> String {
    let raw = sentence(f);
    let mut out = String::with_capacity(raw.len());
    for ch in raw.chars() {
        if ch == ',' {
            while out.ends_with(' ') {
                out.pop();
            }
            if out.is_empty() || out.ends_with(',') {
                continue;
            }
        } else if ch == ' ' && (out.is_empty() || out.ends_with(' ')) {
            continue;
        }
        out.push(ch);
    }
    out.trim_end_matches([',', ' ']).to_string()
}

/// Renders `f` into the question prompt. Every atom must be registered with
/// the surface it carries.
pub fn build_prompt(
    f: &Formula,
    registry: &AtomRegistry,
    template: PromptTemplate,
) -> Result<Prompt, BackendError> {
    registry
        .check(f)
        .map_err(|e| BackendError::Unrenderable(e.to_string()))?;
    Prompt::new(template.apply(&render(f)), template.id())
}
