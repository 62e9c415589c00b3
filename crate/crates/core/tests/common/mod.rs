#![allow(dead_code)]

use std::path::{Path, PathBuf};

use credence_audit::backend::{build_prompt, MockBackend, PromptTemplate, TokenDistribution};
use credence_audit::logic::{parse_formula, AtomRegistry, Formula};
use serde_json::json;
use tempfile::TempDir;

/// Truth value of `f` under `assign`, looked up by atom id. Written here
/// from scratch so test oracles do not share code with the library.
pub fn eval(f: &Formula, assign: &dyn Fn(&str) -> bool) -> bool {
    match f {
        Formula::Atom { id, .. } => assign(id),
        Formula::Not(g) => !eval(g, assign),
        Formula::And(a, b) => eval(a, assign) && eval(b, assign),
        Formula::Or(a, b) => eval(a, assign) || eval(b, assign),
        Formula::Implies(a, b) => !eval(a, assign) || eval(b, assign),
    }
}

pub fn registry(atoms: &[(&str, &str)]) -> AtomRegistry {
    AtomRegistry::from_entries(atoms.iter().copied()).unwrap()
}

pub fn question(f: &Formula, reg: &AtomRegistry) -> String {
    build_prompt(f, reg, PromptTemplate::Default).unwrap().text
}

/// A strict mock answering each formula's question with the given
/// first-token probabilities.
pub fn mock_for(
    reg: &AtomRegistry,
    id: &str,
    answers: &[(Formula, Vec<(&str, f64)>)],
) -> MockBackend {
    let mut m = MockBackend::new(id);
    for (f, toks) in answers {
        let dist =
            TokenDistribution::from_probs(toks.iter().map(|(t, p)| (t.to_string(), *p))).unwrap();
        m.script(&question(f, reg), Vec::<String>::new(), dist);
    }
    m
}

/// A run directory holding a config, proposition file, audit config and
/// mock script.
pub struct Fixture {
    pub dir: TempDir,
}

impl Fixture {
    pub fn config(&self) -> PathBuf {
        self.dir.path().join("credaudit.json")
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

pub struct Scenario<'a> {
    pub atoms: &'a [(&'a str, &'a str)],
    pub formulas: &'a [&'a str],
    /// (formula text, yes, no) for every formula the mock should answer.
    pub answers: &'a [(&'a str, f64, f64)],
    pub audit: serde_json::Value,
    pub backend_id: &'a str,
}

pub fn write_scenario(dir: &Path, s: &Scenario) {
    let reg = registry(s.atoms);
    let answers: Vec<(Formula, Vec<(&str, f64)>)> = s
        .answers
        .iter()
        .map(|(t, y, n)| {
            (
                parse_formula(t, &reg).unwrap(),
                vec![("yes", *y), ("no", *n)],
            )
        })
        .collect();
    let mock = mock_for(&reg, s.backend_id, &answers);
    let atoms: Vec<_> = s
        .atoms
        .iter()
        .map(|(id, surface)| json!({"id": id, "surface": surface}))
        .collect();
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(
        dir.join("mock.json"),
        serde_json::to_string_pretty(&mock.to_script()).unwrap(),
    )
    .unwrap();
    std::fs::write(
        dir.join("props.json"),
        json!({"atoms": atoms, "formulas": s.formulas}).to_string(),
    )
    .unwrap();
    std::fs::write(dir.join("audit.json"), s.audit.to_string()).unwrap();
    std::fs::write(
        dir.join("credaudit.json"),
        json!({
            "backend": {"kind": "mock", "mock_script": "mock.json"},
            "propositions": "props.json",
            "audit": "audit.json",
            "output": "out",
            "seed": 11
        })
        .to_string(),
    )
    .unwrap();
}

pub fn scenario(s: &Scenario) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path(), s);
    Fixture { dir }
}

/// Runs the CLI in-process, returning (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (i32, String, String) {
    use clap::Parser;
    let mut argv = vec!["credaudit"];
    argv.extend_from_slice(args);
    let parsed = credence_audit::cli::Cli::try_parse_from(argv).unwrap();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = credence_audit::cli::run(&parsed, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// Nearest point of conv(vertices) in the plane by dense search: every
/// segment between two vertices at step 1e-4, or the point itself when it
/// lies inside a vertex triangle.
pub fn grid_oracle(c: [f64; 2], vertices: &[[f64; 2]]) -> [f64; 2] {
    let inside = |a: [f64; 2], b: [f64; 2], d: [f64; 2]| {
        let cross = |o: [f64; 2], u: [f64; 2], v: [f64; 2]| {
            (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
        };
        let (s1, s2, s3) = (cross(a, b, c), cross(b, d, c), cross(d, a, c));
        let area = cross(a, b, d);
        area != 0.0
            && ((s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0))
    };
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            for k in j + 1..vertices.len() {
                if inside(vertices[i], vertices[j], vertices[k]) {
                    return c;
                }
            }
        }
    }
    let mut best = vertices[0];
    let mut best_d = f64::INFINITY;
    for a in vertices {
        for b in vertices {
            for step in 0..=10_000 {
                let l = f64::from(step) * 1e-4;
                let x = [l * a[0] + (1.0 - l) * b[0], l * a[1] + (1.0 - l) * b[1]];
                let d = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                if d < best_d {
                    best_d = d;
                    best = x;
                }
            }
        }
    }
    best
}

pub const PARIS: (&str, &str) = ("paris", "Paris is in France");
