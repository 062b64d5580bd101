//! Run configuration: defaults, overlaid by an optional JSON file, overlaid
//! by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tdabc::baselines::KnnConfig;
use tdabc::evaluation::{ClassifierKind, ExperimentConfig, FoldPlan};
use tdabc::{RipsConfig, SelectionPolicy};

pub const OUT_DIR_ENV: &str = "TDABC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "results";

/// Everything a command may need. Every field is optional in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// A bundled or generated dataset name.
    pub dataset: Option<String>,
    /// A CSV file, used instead of `dataset`.
    pub input: Option<PathBuf>,
    pub label_column: String,
    pub seed: u64,
    pub rips: RipsConfig,
    pub policy: SelectionPolicy,
    pub plan: FoldPlan,
    pub knn: KnnConfig,
    pub classifiers: Vec<ClassifierKind>,
    /// Share of each class held out by `classify`.
    pub test_fraction: f64,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            input: None,
            label_column: "label".into(),
            seed: 0,
            rips: RipsConfig::default(),
            policy: SelectionPolicy::default(),
            plan: FoldPlan::default(),
            knn: KnnConfig::default(),
            classifiers: ClassifierKind::ALL.to_vec(),
            test_fraction: 0.2,
            out: None,
            jobs: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Output directory: the configured one, else `$TDABC_OUT_DIR`, else
    /// `results`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            rips: self.rips,
            policy: SelectionPolicy {
                rng_seed: self.seed,
                ..self.policy
            },
            knn: self.knn.clone(),
            plan: FoldPlan {
                seed: self.seed,
                ..self.plan.clone()
            },
            classifiers: self.classifiers.clone(),
        }
    }
}
