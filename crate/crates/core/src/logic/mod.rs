//! Propositional logic over natural-language atoms: formulas, parsing,
//! possible worlds, satisfiability and entailment.

mod formula;
mod parser;
mod sat;
mod world;

pub use formula::{AtomEntry, AtomRegistry, Formula};
pub use parser::{parse_formula, parse_formula_registering};
pub use sat::{
    entails, is_contradiction, is_satisfiable, is_satisfiable_capped, is_tautology,
    minimal_unsat_subset, SatOutcome, DEFAULT_SAT_CAP,
};
pub use world::{
    enumerate_worlds, enumerate_worlds_capped, evaluate, world_count, World, DEFAULT_WORLD_CAP,
};

pub(crate) use world::{check_cap, Compiled};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown atom {0}")]
    UnknownAtom(String),
    #[error("invalid atom identifier {0:?}")]
    InvalidAtomId(String),
    #[error("atom {id} already registered as {existing:?}, not {new:?}")]
    ConflictingAtom {
        id: String,
        existing: String,
        new: String,
    },
    #[error("world assigns no truth value to atom {0}")]
    MissingAtom(String),
    #[error("{atoms} atoms exceed the configured cap of {cap}")]
    CapExceeded { atoms: usize, cap: usize },
    #[error("invalid registry: {0}")]
    Registry(String),
}
