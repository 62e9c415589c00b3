use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AtomRegistry, Formula, LogicError};

/// Default cap on the number of atoms for world enumeration.
pub const DEFAULT_WORLD_CAP: usize = 20;

/// A total truth assignment over a set of atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct World {
    assignment: BTreeMap<String, bool>,
}

impl World {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        Self {
            assignment: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn set(&mut self, id: impl Into<String>, value: bool) {
        self.assignment.insert(id.into(), value);
    }

    pub fn get(&self, id: &str) -> Option<bool> {
        self.assignment.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.assignment.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Classical two-valued evaluation.
pub fn evaluate(f: &Formula, w: &World) -> Result<bool, LogicError> {
    Ok(match f {
        Formula::Atom { id, .. } => w
            .get(id)
            .ok_or_else(|| LogicError::MissingAtom(id.clone()))?,
        Formula::Not(g) => !evaluate(g, w)?,
        Formula::And(a, b) => evaluate(a, w)? & evaluate(b, w)?,
        Formula::Or(a, b) => evaluate(a, w)? | evaluate(b, w)?,
        Formula::Implies(a, b) => !evaluate(a, w)? | evaluate(b, w)?,
    })
}

pub(crate) fn check_cap(atoms: usize, cap: usize) -> Result<(), LogicError> {
    if atoms > cap {
        Err(LogicError::CapExceeded { atoms, cap })
    } else {
        Ok(())
    }
}

/// Number of worlds over `n` atoms, checked against `cap`.
pub fn world_count(n: usize, cap: usize) -> Result<u64, LogicError> {
    check_cap(n, cap)?;
    Ok(1u64 << n)
}

/// Bit index of registry atom `i` inside a world mask: the first registered
/// atom is the most significant bit, so masks 0,1,2,... count in binary over
/// registry order.
pub(crate) fn atom_bit(i: usize, n: usize) -> usize {
    n - 1 - i
}

pub(crate) fn world_from_mask(registry: &AtomRegistry, mask: u64) -> World {
    let n = registry.len();
    World {
        assignment: registry
            .ids()
            .enumerate()
            .map(|(i, id)| (id.to_string(), mask >> atom_bit(i, n) & 1 == 1))
            .collect(),
    }
}

/// All `2^n` worlds in binary-counting order over the registry.
pub fn enumerate_worlds(registry: &AtomRegistry) -> Result<Vec<World>, LogicError> {
    enumerate_worlds_capped(registry, DEFAULT_WORLD_CAP)
}

pub fn enumerate_worlds_capped(
    registry: &AtomRegistry,
    cap: usize,
) -> Result<Vec<World>, LogicError> {
    let count = world_count(registry.len(), cap)?;
    Ok((0..count).map(|m| world_from_mask(registry, m)).collect())
}

/// A formula with atoms resolved to registry bit positions, evaluated against
/// world masks without map lookups.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Bit(usize),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub(crate) fn new(f: &Formula, registry: &AtomRegistry) -> Result<Self, LogicError> {
        let n = registry.len();
        Ok(match f {
            Formula::Atom { id, .. } => {
                let i = registry
                    .position(id)
                    .ok_or_else(|| LogicError::UnknownAtom(id.clone()))?;
                Compiled::Bit(atom_bit(i, n))
            }
            Formula::Not(g) => Compiled::Not(Box::new(Self::new(g, registry)?)),
            Formula::And(a, b) => Compiled::And(
                Box::new(Self::new(a, registry)?),
                Box::new(Self::new(b, registry)?),
            ),
            Formula::Or(a, b) => Compiled::Or(
                Box::new(Self::new(a, registry)?),
                Box::new(Self::new(b, registry)?),
            ),
            Formula::Implies(a, b) => Compiled::Implies(
                Box::new(Self::new(a, registry)?),
                Box::new(Self::new(b, registry)?),
            ),
        })
    }

    pub(crate) fn eval(&self, mask: u64) -> bool {
        match self {
            Compiled::Bit(b) => mask >> b & 1 == 1,
            Compiled::Not(g) => !g.eval(mask),
            Compiled::And(a, b) => a.eval(mask) && b.eval(mask),
            Compiled::Or(a, b) => a.eval(mask) || b.eval(mask),
            Compiled::Implies(a, b) => !a.eval(mask) || b.eval(mask),
        }
    }
}
