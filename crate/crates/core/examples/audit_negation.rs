//! Auditing a credence function for the coherence norms.
//!
//! $ cargo run --example audit_negation

use credence_audit::audit::{render_table, run_audit, AuditConfig, CredenceFunction};
use credence_audit::logic::{parse_formula, AtomRegistry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = AtomRegistry::from_entries([
        ("paris", "Paris is in France"),
        ("rome", "Rome is in Italy"),
    ])?;
    let values = [
        ("paris", 0.95),
        ("!paris", 0.92),
        ("rome", 0.8),
        ("!rome", 0.2),
        ("paris & rome", 0.85),
        ("paris | !paris", 0.97),
    ];
    let parsed = values
        .iter()
        .map(|(t, c)| Ok((parse_formula(t, &reg)?, *c)))
        .collect::<Result<Vec<_>, credence_audit::logic::LogicError>>()?;
    let cf = CredenceFunction::from_credences(reg, parsed)?;

    let config = AuditConfig {
        partitions: vec![vec!["paris".into(), "!paris".into()]],
        ..AuditConfig::default()
    };
    let report = run_audit(&cf, &config)?;
    print!("{}", render_table(&report));
    for check in report.failing() {
        println!(
            "fails {}: {:?} residual {:.3}",
            check.norm, check.subjects, check.residual
        );
    }
    Ok(())
}
