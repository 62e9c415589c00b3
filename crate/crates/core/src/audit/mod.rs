//! Synchronic coherence norms over a probed credence function: negation,
//! partition additivity, entailment monotonicity, tautology and
//! contradiction bounds, consistency of full beliefs, and the assent/dissent
//! symmetry of answers. Reports from two runs can be diffed.

mod checks;
mod function;
mod report;

pub use checks::{
    bound_checks, entailment_check, full_belief_consistency, negation_check, partition_check,
    symmetry_check, verify_partition, BoundChecks, NormCheck, NormId,
};
pub use function::CredenceFunction;
pub use report::{
    diff_reports, render_delta, render_table, run_audit, AuditConfig, AuditReport, AuditSummary,
    CheckError, CheckKey, ReportDelta, ResidualDelta,
};

pub(crate) use function::hex;

use crate::logic::{LogicError, World};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuditError {
    #[error("credence function is empty")]
    EmptyCredenceFunction,
    #[error("missing probe for {0}")]
    MissingProbe(String),
    #[error("credence undefined for {0}")]
    UndefinedCredence(String),
    #[error("not a partition: {reason}")]
    NotAPartition {
        reason: String,
        witness: Option<World>,
    },
    #[error("{premise} does not entail {conclusion}")]
    NoEntailment { premise: String, conclusion: String },
    #[error("full-belief threshold {0} outside (0.5, 1]")]
    ThetaOutOfRange(f64),
    #[error("tolerance {0} must be finite and non-negative")]
    InvalidTolerance(f64),
    #[error("reports cover different formula sets or lexicons")]
    MismatchedFormulaSets,
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

impl AuditError {
    /// Stable kebab-case tag used in report error entries.
    pub fn kind(&self) -> &'static str {
        match self {
            AuditError::EmptyCredenceFunction => "empty-credence-function",
            AuditError::MissingProbe(_) => "missing-probe",
            AuditError::UndefinedCredence(_) => "undefined-credence",
            AuditError::NotAPartition { .. } => "not-a-partition",
            AuditError::NoEntailment { .. } => "no-entailment",
            AuditError::ThetaOutOfRange(_) => "theta-out-of-range",
            AuditError::InvalidTolerance(_) => "invalid-tolerance",
            AuditError::MismatchedFormulaSets => "mismatched-formula-sets",
            AuditError::InvalidRecord(_) => "invalid-record",
            AuditError::Logic(LogicError::CapExceeded { .. }) => "cap-exceeded",
            AuditError::Logic(_) => "logic",
        }
    }
}
