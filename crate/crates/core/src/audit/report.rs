use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checks::{entailment_unchecked, status, Status};
use super::{
    bound_checks, full_belief_consistency, negation_check, partition_check, symmetry_check,
    AuditError, CredenceFunction, NormCheck, NormId,
};
use crate::logic::{entails, parse_formula, Formula};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditConfig {
    /// Full-belief threshold, in (0.5, 1].
    pub theta: f64,
    pub tolerance: f64,
    /// Declared partitions, each a list of formula texts.
    pub partitions: Vec<Vec<String>>,
    /// Maximum number of entailment tests during pair discovery.
    pub entailment_budget: usize,
    pub checks_enabled: Vec<NormId>,
    /// Seeds the sampling of candidate pairs when the budget is exceeded.
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            theta: 0.9,
            tolerance: 0.05,
            partitions: Vec::new(),
            entailment_budget: 10_000,
            checks_enabled: NormId::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl AuditConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Rejects a threshold outside (0.5, 1] or a negative tolerance.
    pub fn validate(&self) -> Result<(), AuditError> {
        if !(self.theta > 0.5 && self.theta <= 1.0) {
            return Err(AuditError::ThetaOutOfRange(self.theta));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(AuditError::InvalidTolerance(self.tolerance));
        }
        Ok(())
    }

    pub fn enabled(&self, norm: NormId) -> bool {
        self.checks_enabled.contains(&norm)
    }
}

/// A check that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckError {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormId>,
    pub kind: String,
    pub subjects: Vec<String>,
    pub message: String,
}

impl CheckError {
    fn new(norm: Option<NormId>, subjects: &[&Formula], e: &AuditError) -> Self {
        Self {
            norm,
            kind: e.kind().to_string(),
            subjects: subjects.iter().map(|f| f.canonical()).collect(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub credence_digest: String,
    pub lexicon_name: String,
    pub backend_id: String,
    pub formulas: Vec<String>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    pub theta: f64,
    pub tolerance: f64,
    pub checks: Vec<NormCheck>,
    pub errors: Vec<CheckError>,
    pub warnings: Vec<String>,
    pub summary: AuditSummary,
    /// Every check passed and none errored.
    pub coherent: bool,
    pub created_at: String,
}

impl AuditReport {
    pub fn failing(&self) -> impl Iterator<Item = &NormCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Collector {
    checks: Vec<NormCheck>,
    errors: Vec<CheckError>,
    warnings: Vec<String>,
}

impl Collector {
    fn take(&mut self, norm: NormId, subjects: &[&Formula], r: Result<NormCheck, AuditError>) {
        match r {
            Ok(c) => self.checks.push(c),
            Err(e) => self.errors.push(CheckError::new(Some(norm), subjects, &e)),
        }
    }
}

/// Runs every enabled and applicable check. Per-check failures become error
/// entries; only an invalid config or an empty credence function is rejected
/// outright.
pub fn run_audit(cf: &CredenceFunction, config: &AuditConfig) -> Result<AuditReport, AuditError> {
    config.validate()?;
    if cf.is_empty() {
        return Err(AuditError::EmptyCredenceFunction);
    }
    let tol = config.tolerance;
    let mut out = Collector {
        checks: Vec::new(),
        errors: Vec::new(),
        warnings: Vec::new(),
    };
    let formulas: Vec<&Formula> = cf.formulas().collect();

    let negated_pairs: Vec<(&Formula, Formula)> = formulas
        .iter()
        .map(|f| (*f, f.negated()))
        .filter(|(_, n)| cf.contains(n))
        .collect();
    if config.enabled(NormId::Negation) {
        for (f, n) in &negated_pairs {
            out.take(NormId::Negation, &[f, n], negation_check(cf, f, tol));
        }
    }
    if config.enabled(NormId::AssentDissentSymmetry) {
        for (f, n) in &negated_pairs {
            out.take(
                NormId::AssentDissentSymmetry,
                &[f, n],
                symmetry_check(cf, f, tol),
            );
        }
    }

    if config.enabled(NormId::Partition) {
        for texts in &config.partitions {
            let parsed: Result<Vec<Formula>, _> = texts
                .iter()
                .map(|t| parse_formula(t, cf.registry()))
                .collect();
            match parsed {
                Ok(cells) => {
                    let refs: Vec<&Formula> = cells.iter().collect();
                    out.take(NormId::Partition, &refs, partition_check(cf, &cells, tol));
                }
                Err(e) => out.errors.push(CheckError {
                    norm: Some(NormId::Partition),
                    kind: "logic".into(),
                    subjects: texts.clone(),
                    message: e.to_string(),
                }),
            }
        }
    }

    let statuses: Vec<Option<Status>> = formulas
        .iter()
        .map(|f| match status(f) {
            Ok(s) => Some(s),
            Err(e) => {
                out.warnings.push(format!("{}: {e}", f.canonical()));
                None
            }
        })
        .collect();

    if config.enabled(NormId::Entailment) {
        discover_entailments(cf, config, &formulas, &statuses, &mut out);
    }

    let bounds = bound_checks(cf, tol);
    out.checks
        .extend(bounds.checks.into_iter().filter(|c| config.enabled(c.norm)));
    if config.enabled(NormId::Tautology) || config.enabled(NormId::Contradiction) {
        out.warnings.extend(bounds.warnings);
    }

    if config.enabled(NormId::FullBeliefConsistency) {
        out.take(
            NormId::FullBeliefConsistency,
            &[],
            full_belief_consistency(cf, config.theta),
        );
    }

    let passed = out.checks.iter().filter(|c| c.passed).count();
    let summary = AuditSummary {
        checks: out.checks.len(),
        passed,
        failed: out.checks.len() - passed,
        errors: out.errors.len(),
        warnings: out.warnings.len(),
    };
    Ok(AuditReport {
        credence_digest: cf.digest(),
        lexicon_name: cf.lexicon_name().to_string(),
        backend_id: cf.backend_id().to_string(),
        formulas: formulas.iter().map(|f| f.canonical()).collect(),
        seed: config.seed,
        config_digest: None,
        theta: config.theta,
        tolerance: tol,
        coherent: summary.failed == 0 && summary.errors == 0,
        checks: out.checks,
        errors: out.errors,
        warnings: out.warnings,
        summary,
        created_at: chrono::Utc::now().to_rfc3339(),
    })
}

fn discover_entailments(
    cf: &CredenceFunction,
    config: &AuditConfig,
    formulas: &[&Formula],
    statuses: &[Option<Status>],
    out: &mut Collector,
) {
    let mut pairs = Vec::new();
    let mut skipped_undefined = 0usize;
    for (i, p) in formulas.iter().enumerate() {
        if statuses[i] != Some(Status::Contingent) {
            continue;
        }
        for (j, c) in formulas.iter().enumerate() {
            if i == j || statuses[j] != Some(Status::Contingent) {
                continue;
            }
            if cf.credence_of(p).is_none() || cf.credence_of(c).is_none() {
                skipped_undefined += 1;
                continue;
            }
            pairs.push((i, j));
        }
    }
    if skipped_undefined > 0 {
        out.warnings.push(format!(
            "entailment discovery skipped {skipped_undefined} pairs with undefined credences"
        ));
    }
    if pairs.len() > config.entailment_budget {
        let total = pairs.len();
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
        pairs.truncate(config.entailment_budget);
        pairs.sort_unstable();
        out.warnings.push(format!(
            "entailment discovery tested {} of {total} pairs",
            config.entailment_budget
        ));
    }
    for (i, j) in pairs {
        let (p, c) = (formulas[i], formulas[j]);
        match entails(p, c) {
            Ok(true) => out.take(
                NormId::Entailment,
                &[p, c],
                entailment_unchecked(cf, p, c, config.tolerance),
            ),
            Ok(false) => {}
            Err(e) => out.errors.push(CheckError::new(
                Some(NormId::Entailment),
                &[p, c],
                &AuditError::from(e),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CheckKey {
    pub norm: NormId,
    pub subjects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDelta {
    pub norm: NormId,
    pub subjects: Vec<String>,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportDelta {
    pub residual_deltas: Vec<ResidualDelta>,
    pub newly_failing: Vec<CheckKey>,
    pub newly_passing: Vec<CheckKey>,
    /// Error entries present only in the later report.
    pub new_errors: Vec<CheckError>,
}

impl ReportDelta {
    pub fn is_empty(&self) -> bool {
        self.residual_deltas.is_empty()
            && self.newly_failing.is_empty()
            && self.newly_passing.is_empty()
            && self.new_errors.is_empty()
    }

    pub fn degraded(&self) -> bool {
        !self.newly_failing.is_empty() || !self.new_errors.is_empty()
    }
}

fn keyed(r: &AuditReport) -> BTreeMap<CheckKey, &NormCheck> {
    let mut m = BTreeMap::new();
    for c in &r.checks {
        m.entry(CheckKey {
            norm: c.norm,
            subjects: c.subjects.clone(),
        })
        .or_insert(c);
    }
    m
}

/// Per-check changes between two audits of the same formulas and lexicon.
pub fn diff_reports(before: &AuditReport, after: &AuditReport) -> Result<ReportDelta, AuditError> {
    let mut a = before.formulas.clone();
    let mut b = after.formulas.clone();
    a.sort();
    b.sort();
    if a != b || before.lexicon_name != after.lexicon_name {
        return Err(AuditError::MismatchedFormulaSets);
    }
    let old = keyed(before);
    let new = keyed(after);
    let mut delta = ReportDelta::default();
    for (key, n) in &new {
        match old.get(key) {
            Some(o) => {
                if o.residual != n.residual {
                    delta.residual_deltas.push(ResidualDelta {
                        norm: key.norm,
                        subjects: key.subjects.clone(),
                        before: o.residual,
                        after: n.residual,
                        delta: n.residual - o.residual,
                    });
                }
                if o.passed && !n.passed {
                    delta.newly_failing.push(key.clone());
                } else if !o.passed && n.passed {
                    delta.newly_passing.push(key.clone());
                }
            }
            None if !n.passed => delta.newly_failing.push(key.clone()),
            None => {}
        }
    }
    delta.new_errors = after
        .errors
        .iter()
        .filter(|e| !before.errors.contains(e))
        .cloned()
        .collect();
    Ok(delta)
}

pub fn render_table(r: &AuditReport) -> String {
    let mut s = String::new();
    let width = r
        .checks
        .iter()
        .map(|c| c.subjects.join(", ").len())
        .max()
        .unwrap_or(0)
        .clamp(8, 60);
    let _ = writeln!(
        s,
        "{:<24} {:<width$} {:>12} {:>8}  result",
        "norm", "subjects", "residual", "tol"
    );
    for c in &r.checks {
        let _ = writeln!(
            s,
            "{:<24} {:<width$} {:>12.6e} {:>8} {}",
            c.norm.as_str(),
            c.subjects.join(", "),
            c.residual,
            c.tolerance,
            if c.passed { " pass" } else { " FAIL" }
        );
        if let Some(core) = &c.core {
            let _ = writeln!(s, "  inconsistent core: {}", core.join(", "));
        }
    }
    for e in &r.errors {
        let _ = writeln!(s, "error [{}] {}", e.kind, e.message);
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(
        s,
        "{} checks, {} passed, {} failed, {} errors: {}",
        r.summary.checks,
        r.summary.passed,
        r.summary.failed,
        r.summary.errors,
        if r.coherent { "coherent" } else { "incoherent" }
    );
    s
}

pub fn render_delta(d: &ReportDelta) -> String {
    if d.is_empty() {
        return "no changes\n".into();
    }
    let mut s = String::new();
    for r in &d.residual_deltas {
        let _ = writeln!(
            s,
            "{:<24} {:<40} {:.6} -> {:.6} ({:+.6})",
            r.norm.as_str(),
            r.subjects.join(", "),
            r.before,
            r.after,
            r.delta
        );
    }
    for k in &d.newly_failing {
        let _ = writeln!(s, "newly failing: {} [{}]", k.norm, k.subjects.join(", "));
    }
    for k in &d.newly_passing {
        let _ = writeln!(s, "newly passing: {} [{}]", k.norm, k.subjects.join(", "));
    }
    for e in &d.new_errors {
        let _ = writeln!(s, "new error [{}] {}", e.kind, e.message);
    }
    s
}
