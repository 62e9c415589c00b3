//! Credences from next-token probabilities.
//!
//! A proposition `p` is put to the model as "Is it the case that p?". The
//! probability mass on assent sequences (`as`) and on dissent sequences
//! (`ds`) after that question gives the credence `as / (as + ds)`; every
//! other continuation is left out of the ratio.

mod lexicon;
mod probe;

pub use lexicon::{AssentLexicon, LexiconFile, LexiconSet, MarkerList};
pub use probe::{
    assent_dissent_symmetry_residual, assent_probability, assent_ratio, credence,
    dissent_probability, yes_no_credence, AnswerMass, DistributionDigest, ProbeOptions,
    ProbeRecord, DEFAULT_EPS_RESP,
};

use crate::backend::BackendError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CredenceError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("non-responsive probe for {}: assent plus dissent mass {}", record.formula, record.as_value + record.ds_value)]
    NonResponsive { record: Box<ProbeRecord> },
    #[error("invalid lexicon: {0}")]
    Lexicon(String),
    #[error("lexicon entry {entry:?} carries the epistemic marker {marker:?}")]
    EpistemicMarker { entry: String, marker: String },
}
