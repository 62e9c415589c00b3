use serde::{Deserialize, Serialize};

use super::{AuditError, CredenceFunction};
use crate::logic::{
    entails, is_contradiction, is_satisfiable, is_tautology, minimal_unsat_subset, Formula,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormId {
    Negation,
    Partition,
    Entailment,
    Tautology,
    Contradiction,
    FullBeliefConsistency,
    AssentDissentSymmetry,
}

impl NormId {
    pub const ALL: [NormId; 7] = [
        NormId::Negation,
        NormId::Partition,
        NormId::Entailment,
        NormId::Tautology,
        NormId::Contradiction,
        NormId::FullBeliefConsistency,
        NormId::AssentDissentSymmetry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NormId::Negation => "negation",
            NormId::Partition => "partition",
            NormId::Entailment => "entailment",
            NormId::Tautology => "tautology",
            NormId::Contradiction => "contradiction",
            NormId::FullBeliefConsistency => "full-belief-consistency",
            NormId::AssentDissentSymmetry => "assent-dissent-symmetry",
        }
    }
}

impl std::fmt::Display for NormId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated norm. `passed` iff `residual ≤ tolerance`; the full-belief
/// check instead passes iff the believed set is satisfiable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    pub norm: NormId,
    pub subjects: Vec<String>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Minimal inconsistent subset of full beliefs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<Vec<String>>,
}

impl NormCheck {
    fn residual(norm: NormId, subjects: &[&Formula], residual: f64, tolerance: f64) -> Self {
        Self {
            norm,
            subjects: subjects.iter().map(|f| f.canonical()).collect(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            threshold: None,
            core: None,
        }
    }
}

/// `|Σ xs − target|` in ordinary float arithmetic, summed left to right.
fn abs_gap(xs: &[f64], target: f64) -> f64 {
    (xs.iter().sum::<f64>() - target).abs()
}

/// `|cr(f) + cr(¬f) − 1|`.
pub fn negation_check(
    cf: &CredenceFunction,
    f: &Formula,
    tol: f64,
) -> Result<NormCheck, AuditError> {
    let neg = f.negated();
    let a = cf.credence(f)?;
    let b = cf.credence(&neg)?;
    Ok(NormCheck::residual(
        NormId::Negation,
        &[f, &neg],
        abs_gap(&[a, b], 1.0),
        tol,
    ))
}

/// Confirms that `cells` are pairwise inconsistent and jointly exhaustive,
/// returning a witness world otherwise.
pub fn verify_partition(cells: &[Formula]) -> Result<(), AuditError> {
    if cells.is_empty() {
        return Err(AuditError::NotAPartition {
            reason: "no cells".into(),
            witness: None,
        });
    }
    for (i, a) in cells.iter().enumerate() {
        for b in &cells[i + 1..] {
            let both = is_satisfiable(&[a.clone(), b.clone()])?;
            if both.satisfiable {
                return Err(AuditError::NotAPartition {
                    reason: format!("{} and {} can both hold", a.canonical(), b.canonical()),
                    witness: both.witness,
                });
            }
        }
    }
    let disjunction = cells[1..]
        .iter()
        .fold(cells[0].clone(), |acc, c| Formula::or(acc, c.clone()));
    let uncovered = is_satisfiable(&[disjunction.negated()])?;
    if uncovered.satisfiable {
        return Err(AuditError::NotAPartition {
            reason: "cells are not exhaustive".into(),
            witness: uncovered.witness,
        });
    }
    Ok(())
}

/// `|Σ cr(cell) − 1|` over cells verified to be pairwise inconsistent and
/// jointly exhaustive.
pub fn partition_check(
    cf: &CredenceFunction,
    cells: &[Formula],
    tol: f64,
) -> Result<NormCheck, AuditError> {
    verify_partition(cells)?;
    let values = cells
        .iter()
        .map(|c| cf.credence(c))
        .collect::<Result<Vec<_>, _>>()?;
    let subjects: Vec<&Formula> = cells.iter().collect();
    Ok(NormCheck::residual(
        NormId::Partition,
        &subjects,
        abs_gap(&values, 1.0),
        tol,
    ))
}

/// `max(0, cr(premise) − cr(conclusion))` for a verified entailment.
pub fn entailment_check(
    cf: &CredenceFunction,
    premise: &Formula,
    conclusion: &Formula,
    tol: f64,
) -> Result<NormCheck, AuditError> {
    if !entails(premise, conclusion)? {
        return Err(AuditError::NoEntailment {
            premise: premise.canonical(),
            conclusion: conclusion.canonical(),
        });
    }
    let a = cf.credence(premise)?;
    let b = cf.credence(conclusion)?;
    Ok(entailment_residual(premise, conclusion, a, b, tol))
}

fn entailment_residual(
    premise: &Formula,
    conclusion: &Formula,
    a: f64,
    b: f64,
    tol: f64,
) -> NormCheck {
    NormCheck::residual(
        NormId::Entailment,
        &[premise, conclusion],
        (a - b).max(0.0),
        tol,
    )
}

pub(crate) fn entailment_unchecked(
    cf: &CredenceFunction,
    premise: &Formula,
    conclusion: &Formula,
    tol: f64,
) -> Result<NormCheck, AuditError> {
    Ok(entailment_residual(
        premise,
        conclusion,
        cf.credence(premise)?,
        cf.credence(conclusion)?,
        tol,
    ))
}

/// Logical status of a probed formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Tautology,
    Contradiction,
    Contingent,
}

pub(crate) fn status(f: &Formula) -> Result<Status, AuditError> {
    Ok(if is_tautology(f)? {
        Status::Tautology
    } else if is_contradiction(f)? {
        Status::Contradiction
    } else {
        Status::Contingent
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundChecks {
    pub checks: Vec<NormCheck>,
    pub warnings: Vec<String>,
}

/// Tautologies should get credence 1 and contradictions 0.
pub fn bound_checks(cf: &CredenceFunction, tol: f64) -> BoundChecks {
    let mut out = BoundChecks::default();
    for f in cf.formulas() {
        let st = match status(f) {
            Ok(s) => s,
            Err(e) => {
                out.warnings.push(format!("{}: {e}", f.canonical()));
                continue;
            }
        };
        if st == Status::Contingent {
            continue;
        }
        let Some(cr) = cf.credence_of(f) else {
            out.warnings.push(format!(
                "{}: bound check skipped, credence undefined",
                f.canonical()
            ));
            continue;
        };
        out.checks.push(match st {
            Status::Tautology => {
                NormCheck::residual(NormId::Tautology, &[f], abs_gap(&[cr], 1.0), tol)
            }
            _ => NormCheck::residual(NormId::Contradiction, &[f], cr, tol),
        });
    }
    out
}

/// The full beliefs `{f : cr(f) ≥ θ}` must be jointly satisfiable. On failure
/// the check carries a minimal inconsistent subset.
pub fn full_belief_consistency(cf: &CredenceFunction, theta: f64) -> Result<NormCheck, AuditError> {
    if !(theta > 0.5 && theta <= 1.0) {
        return Err(AuditError::ThetaOutOfRange(theta));
    }
    let believed: Vec<Formula> = cf
        .formulas()
        .filter(|f| cf.credence_of(f).is_some_and(|c| c >= theta))
        .cloned()
        .collect();
    let sat = is_satisfiable(&believed)?.satisfiable;
    let core = if sat {
        None
    } else {
        Some(
            minimal_unsat_subset(&believed)?
                .unwrap_or_default()
                .into_iter()
                .map(|i| believed[i].canonical())
                .collect(),
        )
    };
    Ok(NormCheck {
        norm: NormId::FullBeliefConsistency,
        subjects: believed.iter().map(Formula::canonical).collect(),
        residual: if sat { 0.0 } else { 1.0 },
        tolerance: 0.0,
        passed: sat,
        threshold: Some(theta),
        core,
    })
}

/// `|as(¬f) − ds(f)|` from the recorded answer masses.
pub fn symmetry_check(
    cf: &CredenceFunction,
    f: &Formula,
    tol: f64,
) -> Result<NormCheck, AuditError> {
    let neg = f.negated();
    let pos = cf
        .get(f)
        .ok_or_else(|| AuditError::MissingProbe(f.canonical()))?;
    let negr = cf
        .get(&neg)
        .ok_or_else(|| AuditError::MissingProbe(neg.canonical()))?;
    Ok(NormCheck::residual(
        NormId::AssentDissentSymmetry,
        &[f, &neg],
        abs_gap(&[negr.as_value], pos.ds_value),
        tol,
    ))
}
