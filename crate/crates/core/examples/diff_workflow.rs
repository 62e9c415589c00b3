//! Comparing audits before and after an intervention.
//!
//! $ cargo run --example diff_workflow

use credence_audit::audit::{diff_reports, render_delta, run_audit, AuditConfig, CredenceFunction};
use credence_audit::logic::{parse_formula, AtomRegistry, Formula};

fn function(
    reg: &AtomRegistry,
    values: &[(&str, f64)],
) -> Result<CredenceFunction, Box<dyn std::error::Error>> {
    let parsed: Vec<(Formula, f64)> = values
        .iter()
        .map(|(t, c)| Ok((parse_formula(t, reg)?, *c)))
        .collect::<Result<_, credence_audit::logic::LogicError>>()?;
    Ok(CredenceFunction::from_credences(reg.clone(), parsed)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = AtomRegistry::from_entries([("p", "the bridge is open"), ("s", "it is snowing")])?;
    let config = AuditConfig::default();
    let before = run_audit(
        &function(&reg, &[("p", 0.7), ("!p", 0.3), ("s", 0.8), ("!s", 0.2)])?,
        &config,
    )?;
    let after = run_audit(
        &function(&reg, &[("p", 0.6), ("!p", 0.6), ("s", 0.8), ("!s", 0.2)])?,
        &config,
    )?;
    let delta = diff_reports(&before, &after)?;
    print!("{}", render_delta(&delta));
    println!("degraded: {}", delta.degraded());
    Ok(())
}
