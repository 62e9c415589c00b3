use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CredenceError;
use crate::logic::Formula;

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon-default-v1.json");
const DEFAULT_MARKERS: &str = include_str!("../../data/epistemic-markers-v1.json");

fn words(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| c.is_ascii_punctuation() && c != '\'')
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Phrases that report the speaker's own epistemic state ("I am sure",
/// "probably", ...). Lexicon entries containing one are rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarkerList {
    phrases: Vec<String>,
}

impl Default for MarkerList {
    fn default() -> Self {
        Self::new(
            serde_json::from_str::<Vec<String>>(DEFAULT_MARKERS).expect("bundled markers parse"),
        )
    }
}

impl MarkerList {
    pub fn new<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            phrases: phrases.into_iter().map(Into::into).collect(),
        }
    }

    pub fn empty() -> Self {
        Self {
            phrases: Vec::new(),
        }
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    /// The first marker occurring in `text` as a contiguous run of words.
    pub fn find_in(&self, text: &str) -> Option<&str> {
        let hay = words(text);
        self.phrases
            .iter()
            .find(|m| {
                let needle = words(m);
                !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle.as_slice())
            })
            .map(String::as_str)
    }

    /// True when the token on its own is a one-word marker.
    pub fn is_marker_token(&self, token: &str) -> bool {
        let tw = words(token);
        tw.len() == 1 && self.phrases.iter().any(|m| words(m) == tw)
    }
}

/// Assent (AS) and dissent (DS) surface sequences.
///
/// Sets are kept sorted so that summation order, and therefore every
/// floating-point result, depends only on set contents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LexiconFile", into = "LexiconFile")]
pub struct AssentLexicon {
    name: String,
    assent: BTreeSet<String>,
    dissent: BTreeSet<String>,
}

/// On-disk lexicon layout: `{name, assent: [...], dissent: [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconFile {
    pub name: String,
    pub assent: Vec<String>,
    pub dissent: Vec<String>,
}

impl TryFrom<LexiconFile> for AssentLexicon {
    type Error = CredenceError;

    fn try_from(f: LexiconFile) -> Result<Self, Self::Error> {
        AssentLexicon::new(f.name, f.assent, f.dissent, &MarkerList::default())
    }
}

impl From<AssentLexicon> for LexiconFile {
    fn from(l: AssentLexicon) -> Self {
        LexiconFile {
            name: l.name,
            assent: l.assent.into_iter().collect(),
            dissent: l.dissent.into_iter().collect(),
        }
    }
}

impl AssentLexicon {
    /// Validates disjointness and rejects entries carrying an epistemic marker.
    pub fn new<A, D, S>(
        name: impl Into<String>,
        assent: A,
        dissent: D,
        markers: &MarkerList,
    ) -> Result<Self, CredenceError>
    where
        A: IntoIterator<Item = S>,
        D: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let assent: BTreeSet<String> = assent.into_iter().map(Into::into).collect();
        let dissent: BTreeSet<String> = dissent.into_iter().map(Into::into).collect();
        if let Some(both) = assent.intersection(&dissent).next() {
            return Err(CredenceError::Lexicon(format!(
                "{both:?} is both an assent and a dissent sequence"
            )));
        }
        for entry in assent.iter().chain(&dissent) {
            if entry.trim().is_empty() {
                return Err(CredenceError::Lexicon("empty lexicon entry".into()));
            }
            if let Some(marker) = markers.find_in(entry) {
                return Err(CredenceError::EpistemicMarker {
                    entry: entry.clone(),
                    marker: marker.to_string(),
                });
            }
        }
        Ok(Self {
            name,
            assent,
            dissent,
        })
    }

    /// The bundled lexicon `default-v1`: common affirmations and denials with
    /// capitalized and leading-space variants listed explicitly.
    pub fn default_lexicon() -> Self {
        serde_json::from_str(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    /// AS = {yes, Yes, " yes", " Yes"}, DS = {no, No, " no", " No"}.
    pub fn yes_no() -> Self {
        Self::new(
            "yes-no",
            ["yes", "Yes", " yes", " Yes"],
            ["no", "No", " no", " No"],
            &MarkerList::empty(),
        )
        .expect("yes/no lexicon is valid")
    }

    pub fn from_json(text: &str, markers: &MarkerList) -> Result<Self, CredenceError> {
        let f: LexiconFile =
            serde_json::from_str(text).map_err(|e| CredenceError::Lexicon(e.to_string()))?;
        Self::new(f.name, f.assent, f.dissent, markers)
    }

    pub fn load(path: &Path, markers: &MarkerList) -> Result<Self, CredenceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CredenceError::Lexicon(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, markers)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn assent(&self) -> &BTreeSet<String> {
        &self.assent
    }

    pub fn dissent(&self) -> &BTreeSet<String> {
        &self.dissent
    }

    /// |AS ∪ DS|.
    pub fn len(&self) -> usize {
        self.assent.len() + self.dissent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A global lexicon with optional per-formula overrides.
#[derive(Debug, Clone)]
pub struct LexiconSet {
    pub global: AssentLexicon,
    pub overrides: BTreeMap<Formula, AssentLexicon>,
}

impl LexiconSet {
    pub fn new(global: AssentLexicon) -> Self {
        Self {
            global,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, f: Formula, lexicon: AssentLexicon) -> Self {
        self.overrides.insert(f, lexicon);
        self
    }

    pub fn for_formula(&self, f: &Formula) -> &AssentLexicon {
        self.overrides.get(f).unwrap_or(&self.global)
    }

    /// Largest |AS ∪ DS| among the lexicons in use.
    pub fn max_len(&self) -> usize {
        self.overrides
            .values()
            .map(AssentLexicon::len)
            .chain([self.global.len()])
            .max()
            .unwrap_or(0)
    }
}
