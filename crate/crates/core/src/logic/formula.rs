use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LogicError;

/// A propositional formula over natural-language atoms.
///
/// Atoms carry both their identifier and the sentence they stand for, so a
/// formula can be rendered into a prompt without consulting the registry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom { id: String, surface: String },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(id: impl Into<String>, surface: impl Into<String>) -> Self {
        Formula::Atom {
            id: id.into(),
            surface: surface.into(),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// The negation of `self`, i.e. `Not(self)`.
    pub fn negated(&self) -> Self {
        Formula::not(self.clone())
    }

    /// Distinct atom identifiers in first-occurrence order.
    pub fn atom_ids(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit_atoms(&mut |id, _| {
            if seen.insert(id) {
                out.push(id);
            }
        });
        out
    }

    pub(crate) fn visit_atoms<'a>(&'a self, visit: &mut impl FnMut(&'a str, &'a str)) {
        match self {
            Formula::Atom { id, surface } => visit(id, surface),
            Formula::Not(f) => f.visit_atoms(visit),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_atoms(visit);
                b.visit_atoms(visit);
            }
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            Formula::And(..) | Formula::Or(..) | Formula::Implies(..)
        )
    }

    /// Binding strength used by the printer; higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Formula::Atom { .. } => 5,
            Formula::Not(_) => 4,
            Formula::And(..) => 3,
            Formula::Or(..) => 2,
            Formula::Implies(..) => 1,
        }
    }

    /// Canonical ASCII text. Parsing it against the same registry yields an
    /// equal formula.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, child: &Formula, parenthesize: bool) -> fmt::Result {
            if parenthesize {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        }

        match self {
            Formula::Atom { id, .. } => write!(f, "{id}"),
            Formula::Not(inner) => {
                write!(f, "!")?;
                operand(f, inner, inner.precedence() < self.precedence())
            }
            // & and | parse left-associatively, -> right-associatively.
            Formula::And(a, b) | Formula::Or(a, b) => {
                let op = if matches!(self, Formula::And(..)) {
                    "&"
                } else {
                    "|"
                };
                operand(f, a, a.precedence() < self.precedence())?;
                write!(f, " {op} ")?;
                operand(f, b, b.precedence() <= self.precedence())
            }
            Formula::Implies(a, b) => {
                operand(f, a, a.precedence() <= self.precedence())?;
                write!(f, " -> ")?;
                operand(f, b, b.precedence() < self.precedence())
            }
        }
    }
}

/// One registered atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomEntry {
    pub id: String,
    pub surface: String,
}

/// Ordered, duplicate-free list of atoms.
///
/// Registry order fixes world enumeration order and the layout of every
/// vector built over worlds, so it never changes once an atom is added.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomRegistry {
    atoms: Vec<AtomEntry>,
}

impl AtomRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I, S, T>(entries: I) -> Result<Self, LogicError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut registry = Self::new();
        for (id, surface) in entries {
            registry.register(id, surface)?;
        }
        Ok(registry)
    }

    /// Parses the registry file format: a JSON array of `{id, surface}`.
    pub fn from_json(text: &str) -> Result<Self, LogicError> {
        let entries: Vec<AtomEntry> =
            serde_json::from_str(text).map_err(|e| LogicError::Registry(e.to_string()))?;
        Self::from_entries(entries.into_iter().map(|e| (e.id, e.surface)))
    }

    /// Adds an atom. Re-registering an identical pair is a no-op; reusing an id
    /// with a different surface is an error.
    pub fn register(
        &mut self,
        id: impl Into<String>,
        surface: impl Into<String>,
    ) -> Result<&AtomEntry, LogicError> {
        let id = id.into();
        let surface = surface.into();
        if !is_identifier(&id) {
            return Err(LogicError::InvalidAtomId(id));
        }
        if let Some(pos) = self.position(&id) {
            if self.atoms[pos].surface != surface {
                return Err(LogicError::ConflictingAtom {
                    id,
                    existing: self.atoms[pos].surface.clone(),
                    new: surface,
                });
            }
            return Ok(&self.atoms[pos]);
        }
        self.atoms.push(AtomEntry { id, surface });
        Ok(self.atoms.last().expect("just pushed"))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn entries(&self) -> &[AtomEntry] {
        &self.atoms
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(|a| a.id.as_str())
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&AtomEntry> {
        self.atoms.iter().find(|a| a.id == id)
    }

    pub fn by_surface(&self, surface: &str) -> Option<&AtomEntry> {
        self.atoms.iter().find(|a| a.surface == surface)
    }

    /// Builds the atom formula for a registered id.
    pub fn atom(&self, id: &str) -> Result<Formula, LogicError> {
        self.get(id)
            .map(|a| Formula::atom(a.id.clone(), a.surface.clone()))
            .ok_or_else(|| LogicError::UnknownAtom(id.to_string()))
    }

    /// Checks that every atom of `f` is registered with the same surface.
    pub fn check(&self, f: &Formula) -> Result<(), LogicError> {
        let mut err = None;
        f.visit_atoms(&mut |id, surface| {
            if err.is_some() {
                return;
            }
            match self.get(id) {
                None => err = Some(LogicError::UnknownAtom(id.to_string())),
                Some(a) if a.surface != surface => {
                    err = Some(LogicError::ConflictingAtom {
                        id: id.to_string(),
                        existing: a.surface.clone(),
                        new: surface.to_string(),
                    })
                }
                Some(_) => {}
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Picks an unused identifier derived from a surface string.
    pub(crate) fn fresh_id_for(&self, surface: &str) -> String {
        let mut base: String = surface
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() {
                    c.to_ascii_lowercase()
                } else {
                    '_'
                }
            })
            .collect();
        while base.contains("__") {
            base = base.replace("__", "_");
        }
        let base = base.trim_matches('_').to_string();
        let base = if base.is_empty() || base.starts_with(|c: char| c.is_ascii_digit()) {
            format!("a_{base}")
        } else {
            base
        };
        if self.get(&base).is_none() {
            return base;
        }
        (2..)
            .map(|k| format!("{base}_{k}"))
            .find(|id| self.get(id).is_none())
            .expect("unbounded suffix search")
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
