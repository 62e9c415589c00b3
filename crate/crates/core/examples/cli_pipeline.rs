//! Writes a self-contained run directory (mock script, propositions, audit
//! config, run config) and drives the `credaudit` commands over it.
//!
//! $ cargo run --example cli_pipeline -- /tmp/credaudit-demo
//! $ cargo run -- --config /tmp/credaudit-demo/credaudit.json report

use std::path::PathBuf;

use credence_audit::backend::{build_prompt, MockBackend, PromptTemplate, TokenDistribution};
use credence_audit::cli::main_with_args;
use credence_audit::logic::{parse_formula, AtomRegistry};
use serde_json::json;

const ANSWERS: &[(&str, f64, f64)] = &[
    ("paris", 0.82, 0.08),
    ("!paris", 0.35, 0.55),
    ("rome", 0.7, 0.2),
    ("!rome", 0.2, 0.7),
    ("paris & rome", 0.6, 0.3),
    ("!(paris & rome)", 0.3, 0.6),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("credaudit-demo"));
    std::fs::create_dir_all(&dir)?;

    let atoms = [
        ("paris", "Paris is in France"),
        ("rome", "Rome is in Italy"),
    ];
    let reg = AtomRegistry::from_entries(atoms)?;
    let mut mock = MockBackend::new("demo-mock");
    for (text, yes, no) in ANSWERS {
        let f = parse_formula(text, &reg)?;
        let q = build_prompt(&f, &reg, PromptTemplate::Default)?.text;
        let rest = 1.0 - yes - no;
        mock.script(
            &q,
            Vec::<String>::new(),
            TokenDistribution::from_probs([("Yes", *yes), ("No", *no), ("Maybe", rest / 2.0)])?,
        );
    }
    std::fs::write(
        dir.join("mock.json"),
        serde_json::to_string_pretty(&mock.to_script())?,
    )?;
    let atom_list: Vec<_> = atoms
        .iter()
        .map(|(id, s)| json!({"id": id, "surface": s}))
        .collect();
    std::fs::write(
        dir.join("props.json"),
        serde_json::to_string_pretty(&json!({
            "atoms": atom_list,
            "formulas": ["paris", "rome", "paris & rome"],
            "truth": {"paris": 1, "rome": 1, "paris & rome": 1, "!paris": 0, "!rome": 0, "!(paris & rome)": 0}
        }))?,
    )?;
    std::fs::write(
        dir.join("audit.json"),
        serde_json::to_string_pretty(&json!({"theta": 0.9, "tolerance": 0.05}))?,
    )?;
    std::fs::write(
        dir.join("credaudit.json"),
        serde_json::to_string_pretty(&json!({
            "backend": {"kind": "mock", "mock_script": "mock.json"},
            "propositions": "props.json",
            "audit": "audit.json",
            "output": "out",
            "seed": 7
        }))?,
    )?;

    let config = dir.join("credaudit.json");
    for cmd in ["probe", "audit", "dominate", "report"] {
        println!("$ credaudit --config {} {cmd}", config.display());
        let code = main_with_args(["credaudit", "--config", config.to_str().unwrap(), cmd]);
        println!("exit {code}\n");
    }
    Ok(())
}
