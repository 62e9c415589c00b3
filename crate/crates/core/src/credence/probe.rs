use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{AssentLexicon, CredenceError, MarkerList};
use crate::backend::{
    build_prompt, sequence_probability, Backend, BackendError, Prompt, PromptTemplate,
    TokenDistribution, EPS_NORM,
};
use crate::logic::{AtomRegistry, Formula};

/// Default non-responsive threshold on `as(p) + ds(p)`.
pub const DEFAULT_EPS_RESP: f64 = 1e-6;

/// Summed probability of a set of answer sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnswerMass {
    pub value: f64,
    pub upper_bound: f64,
    pub approximate: bool,
}

/// The itemized head of the first-position distribution after a prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionDigest {
    pub head: Vec<(String, f64)>,
    pub residual: f64,
    /// Itemized mass on tokens that are themselves epistemic markers. This
    /// mass counts toward neither assent nor dissent.
    pub marker_mass: f64,
}

/// One probed proposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    /// Canonical formula text.
    pub formula: String,
    pub prompt: Prompt,
    pub as_value: f64,
    pub ds_value: f64,
    pub as_upper_bound: f64,
    pub ds_upper_bound: f64,
    /// `as / (as + ds)`; absent for a non-responsive probe.
    pub credence: Option<f64>,
    pub non_responsive: bool,
    pub approximate: bool,
    pub digest: DistributionDigest,
    pub timestamp: String,
    pub backend_id: String,
    pub lexicon_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Knobs shared by every probe in a run.
#[derive(Debug, Clone)]
pub struct ProbeOptions {
    pub template: PromptTemplate,
    pub eps_resp: f64,
    /// Number of head entries kept in the digest.
    pub digest_len: usize,
    pub markers: MarkerList,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            template: PromptTemplate::Default,
            eps_resp: DEFAULT_EPS_RESP,
            digest_len: 20,
            markers: MarkerList::default(),
        }
    }
}

/// Memoizes distributions by context so that every lexicon entry sharing a
/// first token costs one backend call.
struct Memo<'a, B: ?Sized> {
    inner: &'a B,
    seen: Mutex<BTreeMap<(String, Vec<String>), TokenDistribution>>,
}

impl<'a, B: Backend + ?Sized> Memo<'a, B> {
    fn new(inner: &'a B) -> Self {
        Self {
            inner,
            seen: Mutex::new(BTreeMap::new()),
        }
    }
}

impl<B: Backend + ?Sized> Backend for Memo<'_, B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn next_token_distribution(
        &self,
        prompt: &Prompt,
        prefix: &[String],
    ) -> Result<TokenDistribution, BackendError> {
        let key = (prompt.text.clone(), prefix.to_vec());
        if let Some(d) = self.seen.lock().expect("memo poisoned").get(&key) {
            return Ok(d.clone());
        }
        let d = self.inner.next_token_distribution(prompt, prefix)?;
        self.seen
            .lock()
            .expect("memo poisoned")
            .insert(key, d.clone());
        Ok(d)
    }

    fn tokenize(&self, surface: &str) -> Result<Vec<String>, BackendError> {
        self.inner.tokenize(surface)
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("probabilities are finite")
}

fn rounded(x: &BigRational) -> f64 {
    x.to_f64().expect("finite rational")
}

/// Answer mass with the value kept as the exact sum of its float summands.
struct ExactMass {
    value: BigRational,
    upper_bound: f64,
    approximate: bool,
}

impl ExactMass {
    fn rounded(&self) -> AnswerMass {
        AnswerMass {
            value: rounded(&self.value),
            upper_bound: self.upper_bound,
            approximate: self.approximate,
        }
    }
}

fn answer_mass<'s, B: Backend + ?Sized>(
    backend: &B,
    prompt: &Prompt,
    sequences: impl IntoIterator<Item = &'s String>,
) -> Result<ExactMass, CredenceError> {
    let mut mass = ExactMass {
        value: BigRational::zero(),
        upper_bound: 0.0,
        approximate: false,
    };
    let mut firsts = BTreeSet::new();
    for s in sequences {
        let tokens = backend.tokenize(s)?;
        if tokens.is_empty() {
            continue;
        }
        let p = sequence_probability(backend, prompt, &tokens)?;
        mass.value += exact(p.value);
        mass.upper_bound += p.upper_bound;
        mass.approximate |= p.approximate;
        firsts.insert(tokens[0].clone());
    }
    if mass.approximate {
        // The sequences can carry no more than the mass of the first tokens
        // they start with, counting the residual once for unlisted starts.
        let first = backend.next_token_distribution(prompt, &[])?;
        let mut unlisted = false;
        let mut cap = 0.0;
        for t in &firsts {
            match first.get(t) {
                Some(p) => cap += p,
                None => unlisted = true,
            }
        }
        if unlisted {
            cap += first.residual();
        }
        mass.upper_bound = mass.upper_bound.min(cap).max(rounded(&mass.value));
    }
    Ok(mass)
}

/// `a / (a + b)` evaluated exactly on the given floats and rounded once.
pub fn assent_ratio(assent: f64, dissent: f64) -> f64 {
    let a = exact(assent);
    rounded(&(a.clone() / (a + exact(dissent))))
}

/// `as(p) = Σ_{s ∈ AS} P(s | Is it the case that p?)`.
pub fn assent_probability<B: Backend + ?Sized>(
    f: &Formula,
    registry: &AtomRegistry,
    lexicon: &AssentLexicon,
    backend: &B,
    template: PromptTemplate,
) -> Result<AnswerMass, CredenceError> {
    let prompt = build_prompt(f, registry, template)?;
    Ok(answer_mass(backend, &prompt, lexicon.assent())?.rounded())
}

/// `ds(p) = Σ_{s ∈ DS} P(s | Is it the case that p?)`.
pub fn dissent_probability<B: Backend + ?Sized>(
    f: &Formula,
    registry: &AtomRegistry,
    lexicon: &AssentLexicon,
    backend: &B,
    template: PromptTemplate,
) -> Result<AnswerMass, CredenceError> {
    let prompt = build_prompt(f, registry, template)?;
    Ok(answer_mass(backend, &prompt, lexicon.dissent())?.rounded())
}

/// `cr(p) = as(p) / (as(p) + ds(p))`, returned with everything observed on the
/// way. Sums and the ratio are exact over the floats the backend reported,
/// rounded once at the end. A probe whose combined answer mass falls below `eps_resp` fails with
/// [`CredenceError::NonResponsive`], which still carries the record.
pub fn credence<B: Backend + ?Sized>(
    f: &Formula,
    registry: &AtomRegistry,
    lexicon: &AssentLexicon,
    backend: &B,
    opts: &ProbeOptions,
) -> Result<ProbeRecord, CredenceError> {
    let prompt = build_prompt(f, registry, opts.template)?;
    let memo = Memo::new(backend);
    let first = memo.next_token_distribution(&prompt, &[])?;
    let assent = answer_mass(&memo, &prompt, lexicon.assent())?;
    let dissent = answer_mass(&memo, &prompt, lexicon.dissent())?;
    let total = &assent.value + &dissent.value;
    debug_assert!(rounded(&total) <= 1.0 + EPS_NORM);
    let responsive = !total.is_zero() && rounded(&total) >= opts.eps_resp;
    let credence = responsive.then(|| rounded(&(assent.value.clone() / total)));
    let (assent, dissent) = (assent.rounded(), dissent.rounded());
    let marker_mass = first
        .entries()
        .iter()
        .filter(|(t, _)| opts.markers.is_marker_token(t))
        .map(|(_, p)| p)
        .sum();
    let record = ProbeRecord {
        formula: f.canonical(),
        prompt,
        as_value: assent.value,
        ds_value: dissent.value,
        as_upper_bound: assent.upper_bound,
        ds_upper_bound: dissent.upper_bound,
        credence,
        non_responsive: !responsive,
        approximate: assent.approximate || dissent.approximate,
        digest: DistributionDigest {
            head: first.head(opts.digest_len),
            residual: first.residual(),
            marker_mass,
        },
        timestamp: chrono::Utc::now().to_rfc3339(),
        backend_id: backend.id().to_string(),
        lexicon_name: lexicon.name().to_string(),
        config_digest: None,
        seed: None,
    };
    if responsive {
        Ok(record)
    } else {
        Err(CredenceError::NonResponsive {
            record: Box::new(record),
        })
    }
}

/// Credence with AS and DS restricted to "yes" and "no" (with their case and
/// leading-space variants).
pub fn yes_no_credence<B: Backend + ?Sized>(
    f: &Formula,
    registry: &AtomRegistry,
    backend: &B,
    opts: &ProbeOptions,
) -> Result<ProbeRecord, CredenceError> {
    credence(f, registry, &AssentLexicon::yes_no(), backend, opts)
}

/// `|as(¬f) − ds(f)|`. A rational believer assents to `¬f` exactly as strongly
/// as it dissents from `f`; this never feeds back into `cr`.
pub fn assent_dissent_symmetry_residual<B: Backend + ?Sized>(
    f: &Formula,
    registry: &AtomRegistry,
    lexicon: &AssentLexicon,
    backend: &B,
    template: PromptTemplate,
) -> Result<f64, CredenceError> {
    let neg = f.negated();
    let as_neg = assent_probability(&neg, registry, lexicon, backend, template)?;
    let ds_pos = dissent_probability(f, registry, lexicon, backend, template)?;
    Ok((as_neg.value - ds_pos.value).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::MockBackend;
    use crate::logic::parse_formula;

    fn reg() -> AtomRegistry {
        AtomRegistry::from_entries([("p", "P holds")]).unwrap()
    }

    fn p() -> Formula {
        reg().atom("p").unwrap()
    }

    const Q: &str = "Is it the case that P holds?";
    const NQ: &str = "Is it the case that it is not the case that P holds?";

    fn mock(entries: &[(&str, f64)]) -> MockBackend {
        let mut m = MockBackend::new("mock");
        m.script(
            Q,
            Vec::<String>::new(),
            TokenDistribution::from_probs(entries.iter().copied()).unwrap(),
        );
        m
    }

    fn lex(assent: &[&str], dissent: &[&str]) -> AssentLexicon {
        AssentLexicon::new(
            "t",
            assent.iter().copied(),
            dissent.iter().copied(),
            &MarkerList::empty(),
        )
        .unwrap()
    }

    fn assent(l: &AssentLexicon, m: &MockBackend) -> f64 {
        assent_probability(&p(), &reg(), l, m, PromptTemplate::Default)
            .unwrap()
            .value
    }

    fn dissent(l: &AssentLexicon, m: &MockBackend) -> f64 {
        dissent_probability(&p(), &reg(), l, m, PromptTemplate::Default)
            .unwrap()
            .value
    }

    #[test]
    fn assent_sums_lexicon_entries() {
        let m = mock(&[("yes", 0.5), ("sure", 0.1), ("no", 0.3)]);
        assert_eq!(assent(&lex(&["yes", "sure"], &[]), &m), 0.6);
        let m = mock(&[("yes", 0.0), ("no", 1.0)]);
        assert_eq!(assent(&lex(&["yes"], &[]), &m), 0.0);
    }

    #[test]
    fn multi_token_assent() {
        let mut m = mock(&[("of", 0.2), ("no", 0.8)]);
        m.script(
            Q,
            ["of"],
            TokenDistribution::from_probs([(" course", 0.5), (" all", 0.5)]).unwrap(),
        );
        assert_eq!(assent(&lex(&["of course"], &[]), &m), 0.1);
    }

    #[test]
    fn dissent_sums() {
        let m = mock(&[("no", 0.2), ("never", 0.05), ("yes", 0.75)]);
        assert_eq!(dissent(&lex(&[], &["no"]), &m), 0.2);
        assert_eq!(dissent(&lex(&[], &["no", "never"]), &m), 0.25);
        assert_eq!(dissent(&lex(&["yes"], &[]), &m), 0.0);
    }

    #[test]
    fn credence_ratio() {
        let opts = ProbeOptions::default();
        let m = mock(&[("yes", 0.6), ("no", 0.2), ("maybe", 0.2)]);
        let r = credence(&p(), &reg(), &lex(&["yes"], &["no"]), &m, &opts).unwrap();
        assert_eq!(r.credence, Some(0.75));
        assert_eq!((r.as_value, r.ds_value), (0.6, 0.2));
        assert!(!r.approximate && !r.non_responsive);
        assert_eq!(r.digest.marker_mass, 0.2);
        assert_eq!(r.formula, "p");
        assert_eq!(r.backend_id, "mock");

        let m = mock(&[("no", 0.5), ("maybe", 0.5)]);
        let r = credence(&p(), &reg(), &lex(&["yes"], &["no"]), &m, &opts).unwrap();
        assert_eq!(r.credence, Some(0.0));
    }

    #[test]
    fn non_responsive_threshold() {
        let opts = ProbeOptions::default();
        let m = mock(&[("yes", 1e-9), ("no", 1e-9), ("As", 1.0 - 2e-9)]);
        match credence(&p(), &reg(), &lex(&["yes"], &["no"]), &m, &opts) {
            Err(CredenceError::NonResponsive { record }) => {
                assert_eq!(record.credence, None);
                assert!(record.non_responsive);
            }
            other => panic!("expected non-responsive, got {other:?}"),
        }
    }

    #[test]
    fn yes_no_examples() {
        let opts = ProbeOptions::default();
        let m = mock(&[("yes", 0.5), ("no", 0.25), ("maybe", 0.25)]);
        let r = yes_no_credence(&p(), &reg(), &m, &opts).unwrap();
        assert_eq!(r.credence, Some(0.5 / 0.75));
        assert_eq!(r.lexicon_name, "yes-no");
        let m = mock(&[("yes", 0.5), ("no", 0.5)]);
        assert_eq!(
            yes_no_credence(&p(), &reg(), &m, &opts).unwrap().credence,
            Some(0.5)
        );
        let m = mock(&[("maybe", 1.0)]);
        assert!(matches!(
            yes_no_credence(&p(), &reg(), &m, &opts),
            Err(CredenceError::NonResponsive { .. })
        ));
    }

    #[test]
    fn truncated_head_is_flagged() {
        let m = mock(&[("yes", 0.5), ("no", 0.3)]);
        let r = credence(
            &p(),
            &reg(),
            &lex(&["yes", "sure"], &["no"]),
            &m,
            &ProbeOptions::default(),
        )
        .unwrap();
        assert!(r.approximate);
        assert_eq!(r.credence, Some(0.5 / 0.8));
        assert!((r.as_upper_bound - 0.7).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_counts_the_residual_once() {
        let m = mock(&[("yes", 0.5), ("no", 0.3)]);
        let many = ["yes", "sure", "yeah", "indeed", "correct", "right"];
        let r = credence(
            &p(),
            &reg(),
            &lex(&many, &["no", "nope"]),
            &m,
            &ProbeOptions::default(),
        )
        .unwrap();
        assert!((r.as_upper_bound - 0.7).abs() < 1e-12);
        assert!((r.ds_upper_bound - 0.5).abs() < 1e-12);
    }

    #[test]
    fn symmetry_residual() {
        let l = lex(&["yes"], &["no"]);
        let mut m = mock(&[("yes", 0.7), ("no", 0.3)]);
        m.script(
            NQ,
            Vec::<String>::new(),
            TokenDistribution::from_probs([("yes", 0.3), ("no", 0.7)]).unwrap(),
        );
        let r = assent_dissent_symmetry_residual(&p(), &reg(), &l, &m, PromptTemplate::Default)
            .unwrap();
        assert_eq!(r, 0.0);

        let mut m = mock(&[("yes", 0.8), ("no", 0.2)]);
        m.script(
            NQ,
            Vec::<String>::new(),
            TokenDistribution::from_probs([("yes", 0.5), ("no", 0.5)]).unwrap(),
        );
        let r = assent_dissent_symmetry_residual(&p(), &reg(), &l, &m, PromptTemplate::Default)
            .unwrap();
        assert!((r - 0.3).abs() < 1e-15);

        let stranger = parse_formula("p", &reg()).unwrap();
        let other_reg = AtomRegistry::new();
        assert!(matches!(
            assent_dissent_symmetry_residual(
                &stranger,
                &other_reg,
                &l,
                &m,
                PromptTemplate::Default
            ),
            Err(CredenceError::Backend(BackendError::Unrenderable(_)))
        ));
    }
}
