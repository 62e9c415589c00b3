use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BackendError;

/// Tolerance on `Σ entries + residual = 1`.
pub const EPS_NORM: f64 = 1e-6;

/// Leftover mass below this is rounding, not truncation.
const RESIDUAL_FLOOR: f64 = 1e-12;

/// An itemized head of a next-token distribution plus the mass it leaves out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenDistribution {
    entries: BTreeMap<String, f64>,
    residual: f64,
}

impl TokenDistribution {
    /// Builds a distribution with an explicit residual.
    pub fn new(entries: BTreeMap<String, f64>, residual: f64) -> Result<Self, BackendError> {
        for (token, &p) in &entries {
            if !p.is_finite() || p < 0.0 {
                return Err(BackendError::Normalization(format!(
                    "probability {p} for token {token:?}"
                )));
            }
        }
        if !residual.is_finite() || residual < 0.0 {
            return Err(BackendError::Normalization(format!("residual {residual}")));
        }
        let total: f64 = entries.values().sum::<f64>() + residual;
        if (total - 1.0).abs() > EPS_NORM {
            return Err(BackendError::Normalization(format!(
                "entries plus residual sum to {total}"
            )));
        }
        Ok(Self { entries, residual })
    }

    /// Builds a distribution whose residual is whatever the entries leave.
    pub fn from_probs<I, S>(entries: I) -> Result<Self, BackendError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (token, p) in entries {
            // Duplicate itemizations of one token are summed.
            *map.entry(token.into()).or_insert(0.0) += p;
        }
        let residual = 1.0 - map.values().sum::<f64>();
        let residual = if residual.abs() <= RESIDUAL_FLOOR || (-EPS_NORM..0.0).contains(&residual) {
            0.0
        } else {
            residual
        };
        if residual < 0.0 {
            let total: f64 = map.values().sum();
            return Err(BackendError::Normalization(format!(
                "entries sum to {total}"
            )));
        }
        Self::new(map, residual)
    }

    /// Builds a distribution from natural-log probabilities.
    pub fn from_logprobs<I, S>(pairs: I) -> Result<Self, BackendError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Self::from_probs(pairs.into_iter().map(|(t, lp)| (t, lp.exp())))
    }

    /// A distribution that itemizes nothing.
    pub fn unknown() -> Self {
        Self {
            entries: BTreeMap::new(),
            residual: 1.0,
        }
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.entries
    }

    /// True when mass may sit on tokens that are not itemized.
    pub fn is_truncated(&self) -> bool {
        self.residual > RESIDUAL_FLOOR
    }

    /// The `k` most probable entries, ties broken by token text.
    pub fn head(&self, k: usize) -> Vec<(String, f64)> {
        let mut items: Vec<(String, f64)> =
            self.entries.iter().map(|(t, p)| (t.clone(), *p)).collect();
        items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        items.truncate(k);
        items
    }
}
