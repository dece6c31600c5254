//! Experiment configuration files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::emit::canonical_json;
use super::HarnessError;
use crate::family::FamilySpec;
use crate::raag::DefiningGraph;
use crate::walk::{validate_measure, MeasureSpec, StepMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsiConfig {
    /// Length of the forward and backward proxy walks.
    pub horizon: usize,
    /// Number of boundary proxies `ξ`.
    pub proxies: usize,
    /// Number of backward proxies averaged in `ψ̂`.
    pub backward: usize,
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig {
            horizon: 100,
            proxies: 2000,
            backward: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviationConfig {
    pub epsilons: Vec<f64>,
    pub a_values: Vec<f64>,
    /// Probe length as a multiple of `n`.
    pub probe_factor: usize,
}

impl Default for DeviationConfig {
    fn default() -> Self {
        DeviationConfig {
            epsilons: vec![0.05, 0.1],
            a_values: vec![0.05, 0.1],
            probe_factor: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoiteConfig {
    pub epsilon: f64,
    pub a: f64,
    /// Number of evenly spaced checkpoints the monitor inspects.
    pub checkpoints: usize,
    pub probe_factor: usize,
}

impl Default for BoiteConfig {
    fn default() -> Self {
        BoiteConfig {
            epsilon: 0.1,
            a: 0.4,
            checkpoints: 20,
            probe_factor: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed `|λ̂ - λ_oracle|`.
    pub drift_abs: f64,
    /// Allowed `|σ̂² - σ²_oracle|` for the direct estimator.
    pub sigma2_abs: f64,
    /// Allowed relative error of the variance formula.
    pub formula_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            drift_abs: 0.01,
            sigma2_abs: 0.1,
            formula_rel: 0.2,
        }
    }
}

/// All keys any command reads; each command ignores the ones it does not need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,

    pub complex: Option<FamilySpec>,
    pub complex_file: Option<PathBuf>,
    /// Explicit family list for the lemma suite; otherwise `family_count`
    /// standard complexes are generated from the seed.
    pub families: Option<Vec<FamilySpec>>,
    pub family_count: usize,
    pub max_vertices: usize,
    pub exhaustive_limit: usize,
    pub box_quadruples: u64,
    pub triples: usize,
    pub lemma_samples: usize,
    pub projection_threshold: usize,

    pub graph: String,
    pub graph_file: Option<PathBuf>,
    pub measure: MeasureSpec,
    pub allow_degenerate: bool,
    pub generation_radius: usize,
    pub n: usize,
    pub trials: usize,
    /// Certification radius for strong-separation searches.
    pub radius: usize,
    pub s_window: usize,
    pub checkpoints: Vec<usize>,
    pub lambda_oracle: Option<f64>,
    pub sigma2_oracle: Option<f64>,
    pub psi: Option<PsiConfig>,
    pub deviation: DeviationConfig,
    pub boite: BoiteConfig,

    pub raag_instances: usize,
    pub instance_max_len: usize,
    pub certified_pairs: usize,
    pub cert_max_len: usize,
    pub hull_budget: usize,
    pub identity_samples: usize,
    pub identity_max_len: usize,
    pub rank1_max_len: usize,
    pub rank1_max_power: u32,

    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            out: None,
            complex: None,
            complex_file: None,
            families: None,
            family_count: 24,
            max_vertices: 1024,
            exhaustive_limit: 64,
            box_quadruples: 100_000,
            triples: 1000,
            lemma_samples: 1000,
            projection_threshold: 3,
            graph: "f2".into(),
            graph_file: None,
            measure: MeasureSpec::Srw,
            allow_degenerate: false,
            generation_radius: 6,
            n: 10_000,
            trials: 2000,
            radius: crate::raag::DEFAULT_RADIUS,
            s_window: 0,
            checkpoints: Vec::new(),
            lambda_oracle: None,
            sigma2_oracle: None,
            psi: Some(PsiConfig::default()),
            deviation: DeviationConfig::default(),
            boite: BoiteConfig::default(),
            raag_instances: 1000,
            instance_max_len: 4,
            certified_pairs: 10_000,
            cert_max_len: 8,
            hull_budget: 4096,
            identity_samples: 10_000,
            identity_max_len: 12,
            rank1_max_len: 6,
            rank1_max_power: 20,
            tolerances: Tolerances::default(),
        }
    }
}

fn schema(key: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::SchemaViolation {
        key: key.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| HarnessError::ParseError(e.to_string()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            // unknown fields are already the last path segment
            let key = e.path().to_string();
            let message = e.inner().to_string();
            HarnessError::SchemaViolation { key, message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks values that the schema alone cannot express.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let dg = self.defining_graph()?;
        self.step_measure(&dg)?;
        if self.radius == 0 {
            return Err(schema("radius", "must be positive"));
        }
        if self.projection_threshold < 3 {
            return Err(schema("projection_threshold", "must be at least 3"));
        }
        if let Some(p) = &self.psi {
            if p.horizon < 100 {
                return Err(schema("psi.horizon", "must be at least 100"));
            }
        }
        if !(self.boite.epsilon > 0.0 && self.boite.a > 0.0) {
            return Err(schema("boite", "epsilon and a must be positive"));
        }
        Ok(())
    }

    /// The defining graph named by `graph` or read from `graph_file`.
    pub fn defining_graph(&self) -> Result<Arc<DefiningGraph>, HarnessError> {
        let dg = match &self.graph_file {
            Some(path) => {
                let text = read(path)?;
                DefiningGraph::from_json(&text).map_err(|e| schema("graph_file", e.to_string()))?
            }
            None => DefiningGraph::preset(&self.graph)
                .ok_or_else(|| schema("graph", format!("unknown preset {:?}", self.graph)))?,
        };
        Ok(Arc::new(dg))
    }

    pub fn step_measure(&self, dg: &Arc<DefiningGraph>) -> Result<StepMeasure, HarnessError> {
        let m = StepMeasure::from_spec(dg, &self.measure).map_err(|e| schema("measure", e.to_string()))?;
        validate_measure(dg, &m, self.generation_radius, self.allow_degenerate).map_err(|e| schema("measure", e.to_string()))
    }

    /// SHA-256 of the canonical JSON of the effective configuration.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(canonical_json(self).as_bytes());
        hex::encode(h.finalize())
    }
}

pub(crate) fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => HarnessError::FileMissing(path.to_path_buf()),
        _ => HarnessError::Io(format!("{}: {e}", path.display())),
    })
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    ExperimentConfig::from_json(&read(path)?)
}
