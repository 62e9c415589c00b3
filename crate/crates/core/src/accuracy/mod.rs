//! Brier accuracy, coherence as membership in the convex hull of world
//! truth-value vectors, and strict-dominance certificates.

mod projection;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub use projection::{
    project_onto_hull, Projection, ProjectionOptions, DEFAULT_EPS_PROJ, DEFAULT_MAX_ITERATIONS,
};

use crate::audit::CredenceFunction;
use crate::logic::{
    check_cap, is_satisfiable, minimal_unsat_subset, AtomRegistry, Compiled, Formula, LogicError,
    DEFAULT_WORLD_CAP,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AccuracyError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty world vector set")]
    EmptyVectorSet,
    #[error("credence vector formulas do not match the world vector set")]
    FormulaMismatch,
    #[error("projection did not converge after {iterations} iterations (gap {gap:e}, distance {hull_distance})")]
    NonConvergence {
        best: Vec<f64>,
        gap: f64,
        hull_distance: f64,
        iterations: usize,
    },
    #[error("inconsistent truth assignment over {}", core.join(", "))]
    InconsistentTruth { core: Vec<String> },
    #[error("missing value for {0}")]
    MissingValue(String),
}

/// Distinct truth-value tuples `(tv(p_1), ..., tv(p_n))` over all worlds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldVectorSet {
    pub formulas: Vec<String>,
    pub vectors: Vec<Vec<u8>>,
    /// Number of worlds inducing each vector.
    pub multiplicity: Vec<u64>,
}

impl WorldVectorSet {
    pub fn dim(&self) -> usize {
        self.formulas.len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(|&b| f64::from(b)).collect())
            .collect()
    }
}

/// World vectors for `formulas`, in order of first appearance when worlds are
/// enumerated in binary-counting order over the registry.
pub fn world_vectors(
    formulas: &[Formula],
    registry: &AtomRegistry,
) -> Result<WorldVectorSet, AccuracyError> {
    world_vectors_capped(formulas, registry, DEFAULT_WORLD_CAP)
}

pub fn world_vectors_capped(
    formulas: &[Formula],
    registry: &AtomRegistry,
    cap: usize,
) -> Result<WorldVectorSet, AccuracyError> {
    check_cap(registry.len(), cap)?;
    let compiled = formulas
        .iter()
        .map(|f| Compiled::new(f, registry))
        .collect::<Result<Vec<_>, _>>()?;
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut vectors = Vec::new();
    let mut multiplicity = Vec::new();
    for mask in 0..(1u64 << registry.len()) {
        let v: Vec<u8> = compiled.iter().map(|c| u8::from(c.eval(mask))).collect();
        match index.get(&v) {
            Some(&i) => multiplicity[i] += 1,
            None => {
                index.insert(v.clone(), vectors.len());
                vectors.push(v);
                multiplicity.push(1);
            }
        }
    }
    Ok(WorldVectorSet {
        formulas: formulas.iter().map(Formula::canonical).collect(),
        vectors,
        multiplicity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredenceVector {
    pub formulas: Vec<String>,
    pub values: Vec<f64>,
}

impl CredenceVector {
    pub fn new(formulas: Vec<String>, values: Vec<f64>) -> Result<Self, AccuracyError> {
        if formulas.len() != values.len() {
            return Err(AccuracyError::DimensionMismatch {
                expected: formulas.len(),
                found: values.len(),
            });
        }
        Ok(Self { formulas, values })
    }

    /// A vector labelled with the formulas of `w`.
    pub fn for_set(w: &WorldVectorSet, values: Vec<f64>) -> Result<Self, AccuracyError> {
        Self::new(w.formulas.clone(), values)
    }

    /// Credences of every probed formula, in the credence function's order.
    pub fn from_function(cf: &CredenceFunction) -> Result<(Self, Vec<Formula>), AccuracyError> {
        let mut formulas = Vec::new();
        let mut values = Vec::new();
        for f in cf.formulas() {
            let cr = cf
                .credence_of(f)
                .ok_or_else(|| AccuracyError::MissingValue(f.canonical()))?;
            formulas.push(f.clone());
            values.push(cr);
        }
        let labels = formulas.iter().map(Formula::canonical).collect();
        Ok((Self::new(labels, values)?, formulas))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `Σ (v_i − c_i)²`.
pub fn brier_score(c: &[f64], v: &[f64]) -> Result<f64, AccuracyError> {
    if c.len() != v.len() {
        return Err(AccuracyError::DimensionMismatch {
            expected: c.len(),
            found: v.len(),
        });
    }
    Ok(c.iter().zip(v).map(|(ci, vi)| (vi - ci) * (vi - ci)).sum())
}

fn check_labels(c: &CredenceVector, w: &WorldVectorSet) -> Result<(), AccuracyError> {
    if c.len() != w.dim() {
        return Err(AccuracyError::DimensionMismatch {
            expected: w.dim(),
            found: c.len(),
        });
    }
    if c.formulas != w.formulas {
        return Err(AccuracyError::FormulaMismatch);
    }
    Ok(())
}

/// Nearest point of the coherent polytope `conv(W)`.
pub fn project_to_coherent(
    c: &CredenceVector,
    w: &WorldVectorSet,
    opts: &ProjectionOptions,
) -> Result<(CredenceVector, Projection), AccuracyError> {
    check_labels(c, w)?;
    let p = project_onto_hull(&c.values, &w.points(), opts)?;
    let projected = CredenceVector {
        formulas: c.formulas.clone(),
        values: p.point.clone(),
    };
    Ok((projected, p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrierPair {
    pub vector: Vec<u8>,
    pub multiplicity: u64,
    pub original: f64,
    pub projected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCertificate {
    pub original: CredenceVector,
    pub projected: CredenceVector,
    pub pairs: Vec<BrierPair>,
    pub strictly_dominates: bool,
    pub hull_distance: f64,
    pub gap: f64,
    pub iterations: usize,
    pub eps_proj: f64,
}

impl DominanceCertificate {
    /// Smallest Brier improvement over all world vectors.
    pub fn min_margin(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.original - p.projected)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn dominance_certificate(
    c: &CredenceVector,
    w: &WorldVectorSet,
    opts: &ProjectionOptions,
) -> Result<DominanceCertificate, AccuracyError> {
    let (projected, p) = project_to_coherent(c, w, opts)?;
    let pairs = w
        .points()
        .iter()
        .zip(&w.vectors)
        .zip(&w.multiplicity)
        .map(|((v, raw), &m)| {
            Ok(BrierPair {
                vector: raw.clone(),
                multiplicity: m,
                original: brier_score(&c.values, v)?,
                projected: brier_score(&projected.values, v)?,
            })
        })
        .collect::<Result<Vec<_>, AccuracyError>>()?;
    let strictly_dominates =
        p.hull_distance > opts.eps_proj && pairs.iter().all(|q| q.projected < q.original);
    Ok(DominanceCertificate {
        original: c.clone(),
        projected,
        pairs,
        strictly_dominates,
        hull_distance: p.hull_distance,
        gap: p.gap,
        iterations: p.iterations,
        eps_proj: opts.eps_proj,
    })
}

/// Brier score of the probed credences against a supplied truth assignment.
pub fn score_against_truth(
    cf: &CredenceFunction,
    truth: &BTreeMap<Formula, bool>,
) -> Result<f64, AccuracyError> {
    let literals: Vec<Formula> = truth
        .iter()
        .map(|(f, &t)| if t { f.clone() } else { f.negated() })
        .collect();
    if !is_satisfiable(&literals)?.satisfiable {
        let core = minimal_unsat_subset(&literals)?
            .unwrap_or_default()
            .into_iter()
            .map(|i| literals[i].canonical())
            .collect();
        return Err(AccuracyError::InconsistentTruth { core });
    }
    let mut c = Vec::new();
    let mut v = Vec::new();
    for f in cf.formulas() {
        let cr = cf
            .credence_of(f)
            .ok_or_else(|| AccuracyError::MissingValue(f.canonical()))?;
        let t = truth
            .get(f)
            .ok_or_else(|| AccuracyError::MissingValue(f.canonical()))?;
        c.push(cr);
        v.push(if *t { 1.0 } else { 0.0 });
    }
    brier_score(&c, &v)
}
