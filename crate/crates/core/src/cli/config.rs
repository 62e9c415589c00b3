use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::audit::{hex, verify_partition, AuditConfig, NormId};
use crate::backend::{BackendConfig, BackendKind, PromptTemplate};
use crate::credence::{AssentLexicon, LexiconSet, MarkerList};
use crate::logic::{parse_formula, AtomEntry, AtomRegistry, Formula};

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// The run configuration file. Paths are relative to the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub backend: BackendConfig,
    /// Lexicon file; the bundled `default-v1` when absent.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    pub propositions: PathBuf,
    #[serde(default)]
    pub audit: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub force_binary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TruthValue {
    Bool(bool),
    Int(u8),
}

impl TruthValue {
    fn as_bool(self) -> Option<bool> {
        match self {
            TruthValue::Bool(b) => Some(b),
            TruthValue::Int(0) => Some(false),
            TruthValue::Int(1) => Some(true),
            TruthValue::Int(_) => None,
        }
    }
}

/// Atoms, the formulas to probe, declared partitions (as formula indices),
/// an optional truth assignment and optional per-formula lexicons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionFile {
    pub atoms: Vec<AtomEntry>,
    pub formulas: Vec<String>,
    #[serde(default)]
    pub partitions: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<BTreeMap<String, TruthValue>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lexicon_overrides: BTreeMap<String, PathBuf>,
}

/// Command-line values that take precedence over the configuration files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub force_binary: bool,
    pub theta: Option<f64>,
    pub tolerance: Option<f64>,
}

/// A configuration with every referenced file loaded and validated.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub registry: AtomRegistry,
    pub formulas: Vec<Formula>,
    pub partitions: Vec<Vec<Formula>>,
    pub truth: Option<BTreeMap<Formula, bool>>,
    pub lexicons: LexiconSet,
    pub audit: AuditConfig,
    pub output: PathBuf,
    pub force_binary: bool,
    pub config_digest: String,
    pub backend_id: String,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

impl Run {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let mut digest = Sha256::new();
        let mut absorb = |label: &str, text: &str| {
            digest.update(label.as_bytes());
            digest.update([0]);
            digest.update(text.as_bytes());
            digest.update([0]);
        };

        let text = read(path)?;
        absorb("config", &text);
        let config: RunConfig = parse_json(path, &text)?;

        let prop_path = base_dir.join(&config.propositions);
        let prop_text = read(&prop_path)?;
        absorb("propositions", &prop_text);
        let props: PropositionFile = parse_json(&prop_path, &prop_text)?;
        let prop_dir = prop_path.parent().unwrap_or(Path::new(".")).to_path_buf();

        let markers = MarkerList::default();
        let global = match &config.lexicon {
            Some(p) => {
                let full = base_dir.join(p);
                let t = read(&full)?;
                absorb("lexicon", &t);
                AssentLexicon::from_json(&t, &markers)?
            }
            None => AssentLexicon::default_lexicon(),
        };

        let mut audit = match &config.audit {
            Some(p) => {
                let full = base_dir.join(p);
                let t = read(&full)?;
                absorb("audit", &t);
                parse_json::<AuditConfig>(&full, &t)?
            }
            None => AuditConfig::default(),
        };
        audit.seed = config.seed;
        if let Some(t) = overrides.theta {
            audit.theta = t;
        }
        if let Some(t) = overrides.tolerance {
            audit.tolerance = t;
        }
        audit.validate()?;
        absorb("theta", &audit.theta.to_string());
        absorb("tolerance", &audit.tolerance.to_string());
        let force_binary = config.force_binary || overrides.force_binary;
        absorb("force-binary", &force_binary.to_string());

        if config.backend.kind == BackendKind::Mock {
            if let Some(script) = &config.backend.mock_script {
                let full = base_dir.join(script);
                absorb("mock-script", &read(&full)?);
            }
        }

        let registry = AtomRegistry::from_entries(
            props
                .atoms
                .iter()
                .map(|a| (a.id.clone(), a.surface.clone())),
        )?;
        let formulas = props
            .formulas
            .iter()
            .map(|t| parse_formula(t, &registry))
            .collect::<Result<Vec<_>, _>>()?;

        let mut partitions = Vec::new();
        for cells in &props.partitions {
            let fs = cells
                .iter()
                .map(|&i| {
                    formulas.get(i).cloned().ok_or_else(|| {
                        CliError::Invalid(format!("partition index {i} out of range"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            verify_partition(&fs)?;
            partitions.push(fs);
        }

        let mut lexicons = LexiconSet::new(global);
        for (text, p) in &props.lexicon_overrides {
            let f = parse_formula(text, &registry)?;
            let full = prop_dir.join(p);
            let t = read(&full)?;
            absorb("lexicon-override", &t);
            lexicons = lexicons.with_override(f, AssentLexicon::from_json(&t, &markers)?);
        }

        let truth = match &props.truth {
            Some(map) => {
                let mut out = BTreeMap::new();
                for (text, v) in map {
                    let f = parse_formula(text, &registry)?;
                    let b = v.as_bool().ok_or_else(|| {
                        CliError::Invalid(format!(
                            "truth value for {text} must be 0, 1 or a boolean"
                        ))
                    })?;
                    out.insert(f, b);
                }
                Some(out)
            }
            None => None,
        };

        let backend_id = config.backend.resolved_id(&base_dir)?;
        let output = overrides
            .output
            .clone()
            .unwrap_or_else(|| base_dir.join(&config.output));
        let config_digest = hex(&digest.finalize());
        Ok(Self {
            config,
            base_dir,
            registry,
            formulas,
            partitions,
            truth,
            lexicons,
            audit,
            output,
            force_binary,
            config_digest,
            backend_id,
        })
    }

    pub fn template(&self) -> PromptTemplate {
        if self.force_binary {
            PromptTemplate::ForceBinary
        } else {
            PromptTemplate::Default
        }
    }

    fn negations_wanted(&self) -> bool {
        self.audit.enabled(NormId::Negation) || self.audit.enabled(NormId::AssentDissentSymmetry)
    }

    /// Formulas to probe: the listed ones, then each one's negation when
    /// negation checks are on and it is not already listed.
    pub fn targets(&self) -> Vec<Formula> {
        let mut out = self.formulas.clone();
        if self.negations_wanted() {
            let listed: BTreeSet<&Formula> = self.formulas.iter().collect();
            for f in &self.formulas {
                let n = f.negated();
                let is_negation_of_listed =
                    matches!(f, Formula::Not(g) if listed.contains(g.as_ref()));
                if !listed.contains(&n) && !is_negation_of_listed && !out.contains(&n) {
                    out.push(n);
                }
            }
        }
        out
    }

    /// The supplied truth assignment extended to probed negations.
    pub fn truth_for_targets(&self) -> Option<BTreeMap<Formula, bool>> {
        let truth = self.truth.as_ref()?;
        let mut out = truth.clone();
        for f in self.targets() {
            if !out.contains_key(&f) {
                if let Formula::Not(g) = &f {
                    if let Some(&t) = truth.get(g.as_ref()) {
                        out.insert(f.clone(), !t);
                    }
                }
            }
        }
        Some(out)
    }

    pub fn probes_path(&self) -> PathBuf {
        self.output.join("probes.jsonl")
    }

    pub fn audit_path(&self) -> PathBuf {
        self.output.join("audit.json")
    }

    pub fn dominance_path(&self) -> PathBuf {
        self.output.join("dominance.json")
    }

    pub fn backend(&self) -> Result<Box<dyn crate::backend::Backend>, CliError> {
        Ok(self.config.backend.open(&self.base_dir)?)
    }

    pub fn backend_config(&self) -> &BackendConfig {
        &self.config.backend
    }
}
