use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use super::AuditError;
use crate::backend::{build_prompt, PromptTemplate};
use crate::credence::{DistributionDigest, ProbeRecord};
use crate::logic::{parse_formula, AtomRegistry, Formula};

const SYNTHETIC: &str = "synthetic";

/// Probe records keyed by formula, over one atom registry.
///
/// Formulas keep their insertion order, which fixes the order of every
/// derived vector and report.
#[derive(Debug, Clone, PartialEq)]
pub struct CredenceFunction {
    registry: AtomRegistry,
    order: Vec<Formula>,
    entries: BTreeMap<Formula, ProbeRecord>,
    lexicon_name: String,
    backend_id: String,
}

impl CredenceFunction {
    pub fn new(
        registry: AtomRegistry,
        lexicon_name: impl Into<String>,
        backend_id: impl Into<String>,
    ) -> Self {
        Self {
            registry,
            order: Vec::new(),
            entries: BTreeMap::new(),
            lexicon_name: lexicon_name.into(),
            backend_id: backend_id.into(),
        }
    }

    /// Adds or replaces the record for `f`.
    pub fn insert(&mut self, f: Formula, record: ProbeRecord) -> Result<(), AuditError> {
        self.registry.check(&f)?;
        if let Some(cr) = record.credence {
            if !(0.0..=1.0).contains(&cr) {
                return Err(AuditError::InvalidRecord(format!(
                    "credence {cr} for {} is outside [0, 1]",
                    f.canonical()
                )));
            }
        }
        if self.entries.insert(f.clone(), record).is_none() {
            self.order.push(f);
        }
        Ok(())
    }

    /// Builds a credence function from records, parsing each record's formula
    /// against `registry`.
    pub fn from_records<I>(
        registry: AtomRegistry,
        lexicon_name: impl Into<String>,
        backend_id: impl Into<String>,
        records: I,
    ) -> Result<Self, AuditError>
    where
        I: IntoIterator<Item = ProbeRecord>,
    {
        let mut cf = Self::new(registry, lexicon_name, backend_id);
        for r in records {
            let f = parse_formula(&r.formula, &cf.registry)?;
            cf.insert(f, r)?;
        }
        Ok(cf)
    }

    /// A credence function given directly by values, with `as = cr` and
    /// `ds = 1 − cr` in each synthetic record.
    pub fn from_credences<I>(registry: AtomRegistry, values: I) -> Result<Self, AuditError>
    where
        I: IntoIterator<Item = (Formula, f64)>,
    {
        let mut cf = Self::new(registry, SYNTHETIC, SYNTHETIC);
        for (f, cr) in values {
            let prompt = build_prompt(&f, &cf.registry, PromptTemplate::Default)
                .map_err(|e| AuditError::InvalidRecord(e.to_string()))?;
            let record = ProbeRecord {
                formula: f.canonical(),
                prompt,
                as_value: cr,
                ds_value: 1.0 - cr,
                as_upper_bound: cr,
                ds_upper_bound: 1.0 - cr,
                credence: Some(cr),
                non_responsive: false,
                approximate: false,
                digest: DistributionDigest {
                    head: Vec::new(),
                    residual: 0.0,
                    marker_mass: 0.0,
                },
                timestamp: "1970-01-01T00:00:00+00:00".into(),
                backend_id: SYNTHETIC.into(),
                lexicon_name: SYNTHETIC.into(),
                config_digest: None,
                seed: None,
            };
            cf.insert(f, record)?;
        }
        Ok(cf)
    }

    pub fn registry(&self) -> &AtomRegistry {
        &self.registry
    }

    pub fn lexicon_name(&self) -> &str {
        &self.lexicon_name
    }

    pub fn backend_id(&self) -> &str {
        &self.backend_id
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.order.iter()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.entries.contains_key(f)
    }

    pub fn get(&self, f: &Formula) -> Option<&ProbeRecord> {
        self.entries.get(f)
    }

    /// The credence of `f` when probed and defined.
    pub fn credence_of(&self, f: &Formula) -> Option<f64> {
        self.entries.get(f).and_then(|r| r.credence)
    }

    /// Like [`credence_of`](Self::credence_of) but says why a value is absent.
    pub fn credence(&self, f: &Formula) -> Result<f64, AuditError> {
        let r = self
            .entries
            .get(f)
            .ok_or_else(|| AuditError::MissingProbe(f.canonical()))?;
        r.credence
            .ok_or_else(|| AuditError::UndefinedCredence(f.canonical()))
    }

    /// SHA-256 over formulas, answer masses, credences, lexicon and backend.
    /// Timestamps are left out so identical probes give identical digests.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.lexicon_name.as_bytes());
        h.update([0]);
        h.update(self.backend_id.as_bytes());
        for f in &self.order {
            let r = &self.entries[f];
            h.update([0]);
            h.update(f.canonical().as_bytes());
            h.update(r.as_value.to_bits().to_le_bytes());
            h.update(r.ds_value.to_bits().to_le_bytes());
            match r.credence {
                Some(c) => h.update(c.to_bits().to_le_bytes()),
                None => h.update(b"none"),
            }
        }
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
