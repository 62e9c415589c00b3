//! Parsing, entailment and unsatisfiable cores.
//!
//! $ cargo run --example sat_entailment

use credence_audit::logic::{
    entails, enumerate_worlds, is_satisfiable, minimal_unsat_subset, parse_formula, AtomRegistry,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = AtomRegistry::from_entries([
        ("paris", "Paris is in France"),
        ("rome", "Rome is in Italy"),
    ])?;
    let both = parse_formula("paris & rome", &reg)?;
    let either = parse_formula("paris | rome", &reg)?;
    println!("{both} entails {either}: {}", entails(&both, &either)?);
    println!("{either} entails {both}: {}", entails(&either, &both)?);

    let beliefs = [
        parse_formula("paris", &reg)?,
        parse_formula("rome", &reg)?,
        parse_formula("paris -> !rome", &reg)?,
    ];
    let sat = is_satisfiable(&beliefs)?;
    println!("beliefs satisfiable: {}", sat.satisfiable);
    if let Some(core) = minimal_unsat_subset(&beliefs)? {
        let names: Vec<String> = core.iter().map(|&i| beliefs[i].to_string()).collect();
        println!("minimal inconsistent subset: {{{}}}", names.join(", "));
    }

    for w in enumerate_worlds(&reg)? {
        println!("{w:?}");
    }
    Ok(())
}
