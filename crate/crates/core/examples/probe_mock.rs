//! Probing a scripted backend for a credence.
//!
//! $ cargo run --example probe_mock

use credence_audit::backend::{build_prompt, MockBackend, PromptTemplate, TokenDistribution};
use credence_audit::credence::{credence, AssentLexicon, ProbeOptions};
use credence_audit::logic::AtomRegistry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = AtomRegistry::from_entries([("paris", "Paris is in France")])?;
    let paris = reg.atom("paris")?;
    let question = build_prompt(&paris, &reg, PromptTemplate::Default)?.text;
    println!("{question}");

    let mut backend = MockBackend::new("demo-mock");
    backend.script(
        &question,
        Vec::<String>::new(),
        TokenDistribution::from_probs([
            ("Yes", 0.55),
            ("yes", 0.15),
            ("No", 0.2),
            ("Maybe", 0.05),
        ])?,
    );

    let record = credence(
        &paris,
        &reg,
        &AssentLexicon::default_lexicon(),
        &backend,
        &ProbeOptions::default(),
    )?;
    println!("as = {:.4}  ds = {:.4}", record.as_value, record.ds_value);
    println!("cr = {:.4}", record.credence.unwrap_or(f64::NAN));
    println!("approximate: {}", record.approximate);
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}
