//! The full assent lexicon against plain yes/no, and the effect of
//! `--force-binary` on the question.
//!
//! $ cargo run --example yes_no

use credence_audit::backend::{build_prompt, MockBackend, PromptTemplate, TokenDistribution};
use credence_audit::credence::{
    assent_dissent_symmetry_residual, credence, yes_no_credence, AssentLexicon, ProbeOptions,
};
use credence_audit::logic::AtomRegistry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = AtomRegistry::from_entries([("boil", "water boils at 100 degrees at sea level")])?;
    let f = reg.atom("boil")?;
    let q = build_prompt(&f, &reg, PromptTemplate::Default)?.text;
    let nq = build_prompt(&f.negated(), &reg, PromptTemplate::Default)?.text;

    let mut m = MockBackend::new("lexicon-demo");
    m.script(
        &q,
        Vec::<String>::new(),
        TokenDistribution::from_probs([
            ("Yes", 0.4),
            ("Correct", 0.2),
            ("True", 0.1),
            ("No", 0.1),
        ])?,
    );
    m.script(
        &nq,
        Vec::<String>::new(),
        TokenDistribution::from_probs([("No", 0.6), ("Yes", 0.15)])?,
    );

    let opts = ProbeOptions::default();
    let full = credence(&f, &reg, &AssentLexicon::default_lexicon(), &m, &opts)?;
    let yn = yes_no_credence(&f, &reg, &m, &opts)?;
    println!(
        "default lexicon: cr = {:.4} (as {:.2}, ds {:.2})",
        full.credence.unwrap(),
        full.as_value,
        full.ds_value
    );
    println!(
        "yes/no only:     cr = {:.4} (as {:.2}, ds {:.2})",
        yn.credence.unwrap(),
        yn.as_value,
        yn.ds_value
    );

    let sym = assent_dissent_symmetry_residual(
        &f,
        &reg,
        &AssentLexicon::default_lexicon(),
        &m,
        PromptTemplate::Default,
    )?;
    println!("|as(!f) - ds(f)| = {sym:.4}");

    println!(
        "forced: {}",
        build_prompt(&f, &reg, PromptTemplate::ForceBinary)?.text
    );
    Ok(())
}
