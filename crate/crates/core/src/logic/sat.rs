//! DPLL satisfiability over small propositional formula sets.
//!
//! Formulas go to negation normal form and then to CNF by distribution. A
//! formula whose distributed CNF would exceed [`DISTRIBUTION_CLAUSE_LIMIT`]
//! clauses is encoded with one-sided definitional clauses instead, which is
//! equisatisfiable and keeps the witness valid on the original atoms.

use std::collections::BTreeMap;

use super::{check_cap, Formula, LogicError, World};

/// Default cap on distinct atoms handed to the solver.
pub const DEFAULT_SAT_CAP: usize = 256;

const DISTRIBUTION_CLAUSE_LIMIT: usize = 4096;

/// Result of a satisfiability query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatOutcome {
    pub satisfiable: bool,
    /// A model over the atoms of the queried set, present iff satisfiable.
    pub witness: Option<World>,
}

type Lit = usize;

fn lit(var: usize, positive: bool) -> Lit {
    var << 1 | usize::from(!positive)
}

fn lit_var(l: Lit) -> usize {
    l >> 1
}

fn lit_positive(l: Lit) -> bool {
    l & 1 == 0
}

enum Nnf {
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

struct Encoder {
    vars: BTreeMap<String, usize>,
    order: Vec<String>,
    next_aux: usize,
    clauses: Vec<Vec<Lit>>,
}

impl Encoder {
    fn var(&mut self, id: &str) -> usize {
        if let Some(&v) = self.vars.get(id) {
            return v;
        }
        let v = self.order.len();
        self.vars.insert(id.to_string(), v);
        self.order.push(id.to_string());
        v
    }

    fn nnf(&mut self, f: &Formula, positive: bool) -> Nnf {
        match f {
            Formula::Atom { id, .. } => Nnf::Lit(lit(self.var(id), positive)),
            Formula::Not(g) => self.nnf(g, !positive),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let conj = matches!(f, Formula::And(..)) == positive;
                let parts = vec![self.nnf(a, positive), self.nnf(b, positive)];
                if conj {
                    Nnf::And(parts)
                } else {
                    Nnf::Or(parts)
                }
            }
            Formula::Implies(a, b) => {
                let parts = vec![self.nnf(a, !positive), self.nnf(b, positive)];
                if positive {
                    Nnf::Or(parts)
                } else {
                    Nnf::And(parts)
                }
            }
        }
    }

    fn add(&mut self, f: &Formula) {
        let nnf = self.nnf(f, true);
        match distribute(&nnf, DISTRIBUTION_CLAUSE_LIMIT) {
            Some(clauses) => self.clauses.extend(clauses),
            None => {
                let root = self.define(&nnf);
                self.clauses.push(vec![root]);
            }
        }
    }

    /// Returns a literal that implies `node`, adding the defining clauses.
    fn define(&mut self, node: &Nnf) -> Lit {
        match node {
            Nnf::Lit(l) => *l,
            Nnf::And(parts) | Nnf::Or(parts) => {
                let x = self.next_aux;
                self.next_aux += 1;
                let children: Vec<Lit> = parts.iter().map(|p| self.define(p)).collect();
                let nx = lit(x, false);
                if matches!(node, Nnf::And(_)) {
                    for c in children {
                        self.clauses.push(vec![nx, c]);
                    }
                } else {
                    let mut clause = vec![nx];
                    clause.extend(children);
                    self.clauses.push(clause);
                }
                lit(x, true)
            }
        }
    }
}

fn normalize(mut clause: Vec<Lit>) -> Option<Vec<Lit>> {
    clause.sort_unstable();
    clause.dedup();
    // Complementary literals differ only in the low bit and sort adjacently.
    if clause.windows(2).any(|w| lit_var(w[0]) == lit_var(w[1])) {
        None
    } else {
        Some(clause)
    }
}

fn distribute(node: &Nnf, limit: usize) -> Option<Vec<Vec<Lit>>> {
    match node {
        Nnf::Lit(l) => Some(vec![vec![*l]]),
        Nnf::And(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(distribute(p, limit)?);
                if out.len() > limit {
                    return None;
                }
            }
            Some(out)
        }
        Nnf::Or(parts) => {
            let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
            for p in parts {
                let rhs = distribute(p, limit)?;
                if acc.len().saturating_mul(rhs.len()) > limit {
                    return None;
                }
                let mut next = Vec::with_capacity(acc.len() * rhs.len());
                for a in &acc {
                    for b in &rhs {
                        let merged: Vec<Lit> = a.iter().chain(b).copied().collect();
                        if let Some(c) = normalize(merged) {
                            next.push(c);
                        }
                    }
                }
                acc = next;
            }
            Some(acc)
        }
    }
}

struct Dpll<'a> {
    clauses: &'a [Vec<Lit>],
    occurrences: Vec<usize>,
}

impl Dpll<'_> {
    fn value(assign: &[Option<bool>], l: Lit) -> Option<bool> {
        assign[lit_var(l)].map(|v| v == lit_positive(l))
    }

    /// Unit propagation to fixpoint. Returns false on conflict.
    fn propagate(&self, assign: &mut [Option<bool>]) -> bool {
        loop {
            let mut changed = false;
            for clause in self.clauses {
                let mut unassigned = None;
                let mut open = 0;
                let mut satisfied = false;
                for &l in clause {
                    match Self::value(assign, l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match (open, unassigned) {
                    (0, _) => return false,
                    (1, Some(l)) => {
                        assign[lit_var(l)] = Some(lit_positive(l));
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn branch_var(&self, assign: &[Option<bool>]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for clause in self.clauses {
            if clause.iter().any(|&l| Self::value(assign, l) == Some(true)) {
                continue;
            }
            for &l in clause {
                let v = lit_var(l);
                if assign[v].is_none()
                    && best.is_none_or(|b| self.occurrences[v] > self.occurrences[b])
                {
                    best = Some(v);
                }
            }
        }
        best
    }

    fn solve(&self, assign: &mut Vec<Option<bool>>) -> bool {
        if !self.propagate(assign) {
            return false;
        }
        let Some(v) = self.branch_var(assign) else {
            return true;
        };
        for choice in [true, false] {
            let mut trial = assign.clone();
            trial[v] = Some(choice);
            if self.solve(&mut trial) {
                *assign = trial;
                return true;
            }
        }
        false
    }
}

/// Decides whether some world makes every formula in `fs` true.
pub fn is_satisfiable(fs: &[Formula]) -> Result<SatOutcome, LogicError> {
    is_satisfiable_capped(fs, DEFAULT_SAT_CAP)
}

pub fn is_satisfiable_capped(fs: &[Formula], cap: usize) -> Result<SatOutcome, LogicError> {
    let mut enc = Encoder {
        vars: BTreeMap::new(),
        order: Vec::new(),
        next_aux: 0,
        clauses: Vec::new(),
    };
    for f in fs {
        f.visit_atoms(&mut |id, _| {
            enc.var(id);
        });
    }
    check_cap(enc.order.len(), cap)?;
    // Auxiliary variables are numbered after every atom.
    enc.next_aux = enc.order.len();
    for f in fs {
        enc.add(f);
    }

    let mut occurrences = vec![0usize; enc.next_aux];
    for clause in &enc.clauses {
        for &l in clause {
            occurrences[lit_var(l)] += 1;
        }
    }
    let solver = Dpll {
        clauses: &enc.clauses,
        occurrences,
    };
    let mut assign = vec![None; enc.next_aux];
    if !solver.solve(&mut assign) {
        return Ok(SatOutcome {
            satisfiable: false,
            witness: None,
        });
    }
    let witness = World::from_pairs(
        enc.order
            .iter()
            .enumerate()
            .map(|(v, id)| (id.clone(), assign[v].unwrap_or(false))),
    );
    Ok(SatOutcome {
        satisfiable: true,
        witness: Some(witness),
    })
}

/// `premise ⊨ conclusion` iff `{premise, ¬conclusion}` is unsatisfiable.
pub fn entails(premise: &Formula, conclusion: &Formula) -> Result<bool, LogicError> {
    Ok(!is_satisfiable(&[premise.clone(), conclusion.negated()])?.satisfiable)
}

pub fn is_tautology(f: &Formula) -> Result<bool, LogicError> {
    Ok(!is_satisfiable(&[f.negated()])?.satisfiable)
}

pub fn is_contradiction(f: &Formula) -> Result<bool, LogicError> {
    Ok(!is_satisfiable(std::slice::from_ref(f))?.satisfiable)
}

/// Shrinks an unsatisfiable set by greedy deletion: each member is dropped if
/// the rest stays unsatisfiable. Returns indices into `fs` of a minimal
/// unsatisfiable subset, or `None` when `fs` is satisfiable.
pub fn minimal_unsat_subset(fs: &[Formula]) -> Result<Option<Vec<usize>>, LogicError> {
    if is_satisfiable(fs)?.satisfiable {
        return Ok(None);
    }
    let mut keep: Vec<usize> = (0..fs.len()).collect();
    let mut i = 0;
    while i < keep.len() {
        let trial: Vec<Formula> = keep
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &k)| fs[k].clone())
            .collect();
        if is_satisfiable(&trial)?.satisfiable {
            i += 1;
        } else {
            keep.remove(i);
        }
    }
    Ok(Some(keep))
}
