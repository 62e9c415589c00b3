use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::Run;
use super::store::{read_json, read_rows, write_json, write_rows, ErrorRow, ProbeRow};
use super::CliError;
use crate::accuracy::{
    dominance_certificate, score_against_truth, world_vectors, CredenceVector,
    DominanceCertificate, ProjectionOptions,
};
use crate::audit::{
    diff_reports, render_delta, render_table, run_audit, AuditReport, CredenceFunction, ReportDelta,
};
use crate::backend::Backend;
use crate::credence::{credence, CredenceError, ProbeOptions, ProbeRecord};
use crate::logic::Formula;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
/// Some probes failed and were recorded as error rows.
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ProbeSummary {
    pub targets: usize,
    pub skipped: usize,
    pub written: usize,
    pub non_responsive: usize,
    pub failed: usize,
}

impl ProbeSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }
}

fn probe_one(run: &Run, backend: &dyn Backend, f: &Formula, opts: &ProbeOptions) -> ProbeRow {
    let lexicon = run.lexicons.for_formula(f);
    let stamp = |mut r: ProbeRecord| {
        r.config_digest = Some(run.config_digest.clone());
        r.seed = Some(run.config.seed);
        ProbeRow::Record(r)
    };
    match credence(f, &run.registry, lexicon, backend, opts) {
        Ok(r) => stamp(r),
        Err(CredenceError::NonResponsive { record }) => stamp(*record),
        Err(e) => ProbeRow::Error(ErrorRow {
            formula: f.canonical(),
            lexicon_name: lexicon.name().to_string(),
            backend_id: run.backend_id.clone(),
            error: e.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            config_digest: Some(run.config_digest.clone()),
            seed: Some(run.config.seed),
        }),
    }
}

/// Probes up to `max_parallel` formulas at a time; results keep input order.
fn probe_all(run: &Run, backend: &dyn Backend, todo: &[Formula]) -> Vec<ProbeRow> {
    let opts = ProbeOptions {
        template: run.template(),
        ..ProbeOptions::default()
    };
    let workers = run
        .backend_config()
        .max_parallel
        .clamp(1, todo.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ProbeRow>>> = Mutex::new(vec![None; todo.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= todo.len() {
                    break;
                }
                let row = probe_one(run, backend, &todo[i], &opts);
                slots.lock().expect("slots poisoned")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("slots poisoned")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

fn key_of(run: &Run, f: &Formula) -> (String, String, String) {
    (
        f.canonical(),
        run.lexicons.for_formula(f).name().to_string(),
        run.backend_id.clone(),
    )
}

/// Probes every target not yet recorded under its (formula, lexicon,
/// backend) key, or all of them with `refresh`.
pub fn cmd_probe(run: &Run, refresh: bool, out: &mut dyn Write) -> Result<ProbeSummary, CliError> {
    let path = run.probes_path();
    let rows = read_rows(&path)?;
    let done: BTreeSet<(String, String, String)> = rows
        .iter()
        .filter(|r| !r.is_error())
        .map(|r| {
            let (a, b, c) = r.key();
            (a.to_string(), b.to_string(), c.to_string())
        })
        .collect();
    let targets = run.targets();
    let todo: Vec<Formula> = targets
        .iter()
        .filter(|f| refresh || !done.contains(&key_of(run, f)))
        .cloned()
        .collect();
    let mut summary = ProbeSummary {
        targets: targets.len(),
        skipped: targets.len() - todo.len(),
        ..Default::default()
    };
    if todo.is_empty() {
        let _ = writeln!(
            out,
            "all {} probes already recorded in {}",
            targets.len(),
            path.display()
        );
        return Ok(summary);
    }

    let backend = run.backend()?;
    if let Some(w) = run
        .backend_config()
        .coverage_warning(run.lexicons.max_len())
    {
        let _ = writeln!(out, "warning: {w}");
    }
    let fresh = probe_all(run, backend.as_ref(), &todo);
    summary.failed = fresh.iter().filter(|r| r.is_error()).count();
    summary.non_responsive = fresh
        .iter()
        .filter(|r| matches!(r, ProbeRow::Record(rec) if rec.non_responsive))
        .count();
    if summary.failed == fresh.len() {
        let first = fresh.iter().find_map(|r| match r {
            ProbeRow::Error(e) => Some(e.error.clone()),
            ProbeRow::Record(_) => None,
        });
        return Err(CliError::ProbeFailed {
            failed: summary.failed,
            first: first.unwrap_or_default(),
        });
    }

    let replaced: BTreeSet<(String, String, String)> =
        todo.iter().map(|f| key_of(run, f)).collect();
    let mut merged: Vec<ProbeRow> = rows
        .into_iter()
        .filter(|r| {
            let (a, b, c) = r.key();
            !replaced.contains(&(a.to_string(), b.to_string(), c.to_string()))
        })
        .collect();
    summary.written = fresh.len();
    for row in &fresh {
        match row {
            ProbeRow::Record(r) => {
                let cr = r
                    .credence
                    .map_or_else(|| "non-responsive".to_string(), |c| format!("{c}"));
                let _ = writeln!(out, "{:<40} cr = {cr}", r.formula);
            }
            ProbeRow::Error(e) => {
                let _ = writeln!(out, "{:<40} error: {}", e.formula, e.error);
            }
        }
    }
    merged.extend(fresh);
    write_rows(&path, &merged)?;
    let _ = writeln!(
        out,
        "{} probed, {} skipped, {} failed, {} non-responsive -> {}",
        summary.written - summary.failed,
        summary.skipped,
        summary.failed,
        summary.non_responsive,
        path.display()
    );
    Ok(summary)
}

/// The credence function over `formulas` from the latest matching records.
pub fn credence_function(
    run: &Run,
    rows: &[ProbeRow],
    formulas: &[Formula],
) -> Result<CredenceFunction, CliError> {
    let mut latest: BTreeMap<(String, String, String), &ProbeRecord> = BTreeMap::new();
    for row in rows {
        if let ProbeRow::Record(r) = row {
            let (a, b, c) = row.key();
            latest.insert((a.to_string(), b.to_string(), c.to_string()), r);
        }
    }
    let mut cf = CredenceFunction::new(
        run.registry.clone(),
        run.lexicons.global.name(),
        run.backend_id.clone(),
    );
    let mut missing = Vec::new();
    for f in formulas {
        match latest.get(&key_of(run, f)) {
            Some(r) => cf.insert(f.clone(), (*r).clone())?,
            None => missing.push(f.canonical()),
        }
    }
    if !missing.is_empty() {
        return Err(CliError::MissingProbes(missing));
    }
    Ok(cf)
}

pub fn cmd_audit(run: &Run, out: &mut dyn Write) -> Result<AuditReport, CliError> {
    let rows = read_rows(&run.probes_path())?;
    let cf = credence_function(run, &rows, &run.targets())?;
    let mut config = run.audit.clone();
    config.partitions.extend(
        run.partitions
            .iter()
            .map(|cells| cells.iter().map(Formula::canonical).collect()),
    );
    let mut report = run_audit(&cf, &config)?;
    report.config_digest = Some(run.config_digest.clone());
    let path = run.audit_path();
    write_json(&path, &report)?;
    let _ = write!(out, "{}", render_table(&report));
    let _ = writeln!(out, "report -> {}", path.display());
    Ok(report)
}

/// The certificate together with the provenance every artifact carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceArtifact {
    pub config_digest: String,
    pub lexicon_name: String,
    pub backend_id: String,
    pub seed: u64,
    pub certificate: DominanceCertificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_brier: Option<f64>,
}

pub fn render_certificate(c: &DominanceCertificate) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "formulas: {}", c.original.formulas.join(", "));
    let _ = writeln!(s, "hull distance: {:.9}", c.hull_distance);
    let _ = writeln!(
        s,
        "{:<24} {:>6} {:>12} {:>12}",
        "world vector", "worlds", "BR(c)", "BR(proj)"
    );
    for p in &c.pairs {
        let bits: String = p.vector.iter().map(|b| char::from(b'0' + b)).collect();
        let _ = writeln!(
            s,
            "{bits:<24} {:>6} {:>12.6} {:>12.6}",
            p.multiplicity, p.original, p.projected
        );
    }
    let _ = writeln!(
        s,
        "{}",
        if c.strictly_dominates {
            "strictly dominated by the projection"
        } else {
            "coherent: not dominated"
        }
    );
    s
}

pub fn cmd_dominate(run: &Run, out: &mut dyn Write) -> Result<DominanceArtifact, CliError> {
    let targets = run.targets();
    let w = world_vectors(&targets, &run.registry)?;
    let rows = read_rows(&run.probes_path())?;
    let cf = credence_function(run, &rows, &targets)?;
    let (c, _) = CredenceVector::from_function(&cf)?;
    let certificate = dominance_certificate(&c, &w, &ProjectionOptions::default())?;
    let truth_brier = match run.truth_for_targets() {
        Some(t) => Some(score_against_truth(&cf, &t)?),
        None => None,
    };
    let artifact = DominanceArtifact {
        config_digest: run.config_digest.clone(),
        lexicon_name: cf.lexicon_name().to_string(),
        backend_id: cf.backend_id().to_string(),
        seed: run.config.seed,
        certificate,
        truth_brier,
    };
    let path = run.dominance_path();
    write_json(&path, &artifact)?;
    let _ = write!(out, "{}", render_certificate(&artifact.certificate));
    if let Some(b) = truth_brier {
        let _ = writeln!(out, "Brier score against supplied truth: {b:.6}");
    }
    let _ = writeln!(out, "certificate -> {}", path.display());
    Ok(artifact)
}

pub fn cmd_diff(before: &Path, after: &Path, out: &mut dyn Write) -> Result<ReportDelta, CliError> {
    let a: AuditReport = read_json(before)?;
    let b: AuditReport = read_json(after)?;
    let delta = diff_reports(&a, &b)?;
    let _ = write!(out, "{}", render_delta(&delta));
    Ok(delta)
}

/// Prints the stored audit report, and the dominance certificate when present.
pub fn cmd_report(run: &Run, out: &mut dyn Write) -> Result<AuditReport, CliError> {
    let report: AuditReport = read_json(&run.audit_path())?;
    let _ = writeln!(
        out,
        "backend {}  lexicon {}  seed {}  created {}",
        report.backend_id, report.lexicon_name, report.seed, report.created_at
    );
    let _ = write!(out, "{}", render_table(&report));
    let dom = run.dominance_path();
    if dom.exists() {
        let d: DominanceArtifact = read_json(&dom)?;
        let _ = write!(out, "{}", render_certificate(&d.certificate));
    }
    Ok(report)
}
