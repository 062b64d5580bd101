//! Repeated stratified cross-validation and the metric suite.

mod metrics;
mod report;

pub use metrics::{
    average_precision, binary_rates, class_metrics, f1, gmean, roc_auc, roc_auc_ovr_macro, BinaryRates, ClassMetrics,
};
pub use report::{EvaluationReport, MetricRecord, RampReport, Scope, SummaryRow};

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{knn_predict, KnnConfig};
use crate::classifier::{classify_selection, AssociationTable};
use crate::datasets::{make_imbalance_ramp, LabeledDataset, RAMP_STEPS};
use crate::error::{Error, Result};
use crate::persistence::boundary_reduce;
use crate::rips::{build_rips, pairwise_distances, DistanceMatrix, RipsConfig};
use crate::rng;
use crate::selection::{select_subcomplex, Selection, SelectionPolicy, Selector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FoldPlan {
    pub folds: usize,
    pub repeats: usize,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for FoldPlan {
    fn default() -> Self {
        FoldPlan {
            folds: 10,
            repeats: 5,
            stratified: true,
            seed: 0,
        }
    }
}

impl FoldPlan {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 folds, got {}",
                self.folds
            )));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("need at least one repeat".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub repeat: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

const SPLIT_STREAM: u64 = 0x5b1;

/// `plan.repeats` independent partitions of the indices into `plan.folds`
/// test folds. Stratified plans deal each class's shuffled members
/// round-robin, continuing where the previous class stopped.
pub fn split(labels: &[usize], plan: &FoldPlan) -> Result<Vec<Fold>> {
    plan.validate()?;
    if labels.len() < plan.folds {
        return Err(Error::InvalidConfig(format!(
            "{} points cannot fill {} folds",
            labels.len(),
            plan.folds
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    for (class, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < 2 {
            return Err(Error::DegenerateClass { class, size: m.len() });
        }
        if plan.stratified && !m.is_empty() && m.len() < plan.folds {
            log::warn!(
                "class {class} has {} members for {} folds; some test folds will miss it",
                m.len(),
                plan.folds
            );
        }
    }

    let mut out = Vec::with_capacity(plan.folds * plan.repeats);
    for repeat in 0..plan.repeats {
        let mut rng = rng::stream(plan.seed, &[SPLIT_STREAM, repeat as u64]);
        let order: Vec<usize> = if plan.stratified {
            members
                .iter()
                .flat_map(|m| {
                    let mut m = m.clone();
                    m.shuffle(&mut rng);
                    m
                })
                .collect()
        } else {
            let mut all: Vec<usize> = (0..labels.len()).collect();
            all.shuffle(&mut rng);
            all
        };
        let mut assignment = vec![0; labels.len()];
        for (k, &i) in order.iter().enumerate() {
            assignment[i] = k % plan.folds;
        }
        for fold in 0..plan.folds {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == fold);
            out.push(Fold {
                repeat,
                fold,
                train,
                test,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "TDABC-A")]
    TdabcAvg,
    #[serde(rename = "TDABC-M")]
    TdabcMax,
    #[serde(rename = "TDABC-R")]
    TdabcRand,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "WKNN")]
    Wknn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::TdabcAvg,
        ClassifierKind::TdabcMax,
        ClassifierKind::TdabcRand,
        ClassifierKind::Knn,
        ClassifierKind::Wknn,
    ];

    pub fn selector(self) -> Option<Selector> {
        match self {
            ClassifierKind::TdabcAvg => Some(Selector::AvgInt),
            ClassifierKind::TdabcMax => Some(Selector::MaxInt),
            ClassifierKind::TdabcRand => Some(Selector::RandInt),
            ClassifierKind::Knn | ClassifierKind::Wknn => None,
        }
    }

    pub fn is_tdabc(self) -> bool {
        self.selector().is_some()
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::TdabcAvg => "TDABC-A",
            ClassifierKind::TdabcMax => "TDABC-M",
            ClassifierKind::TdabcRand => "TDABC-R",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Wknn => "WKNN",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown classifier `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub rips: RipsConfig,
    /// Shared by every TDABC variant; the selector is set per variant.
    pub policy: SelectionPolicy,
    pub knn: KnnConfig,
    pub plan: FoldPlan,
    pub classifiers: Vec<ClassifierKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rips: RipsConfig::default(),
            policy: SelectionPolicy::default(),
            knn: KnnConfig::default(),
            plan: FoldPlan::default(),
            classifiers: ClassifierKind::ALL.to_vec(),
        }
    }
}

const TDABC_STREAM: u64 = 0x7dab;
const KNN_STREAM: u64 = 0x4e4e;

struct Prepared {
    dist: DistanceMatrix,
    /// Per classifier: its selection for TDABC variants, or the error that
    /// prevented building one.
    selections: Vec<Option<std::result::Result<Selection, String>>>,
}

fn prepare(dataset: &LabeledDataset, config: &ExperimentConfig) -> Result<Prepared> {
    let dist = pairwise_distances(&dataset.cloud, config.rips.metric)?;
    let needs_complex = config.classifiers.iter().any(|k| k.is_tdabc());
    let built = needs_complex.then(|| {
        build_rips(&dist, &config.rips).map(|k| {
            let d = boundary_reduce(&k);
            (k, d)
        })
    });
    let selections = config
        .classifiers
        .iter()
        .map(|kind| {
            let selector = kind.selector()?;
            let policy = SelectionPolicy {
                selector,
                rng_seed: rng::derive_seed(config.plan.seed, &[selector as u64]),
                ..config.policy
            };
            Some(
                match built.as_ref().expect("built when any TDABC variant is requested") {
                    Ok((k, d)) => select_subcomplex(k, d, &policy).map_err(|e| e.to_string()),
                    Err(e) => Err(e.to_string()),
                },
            )
        })
        .collect();
    Ok(Prepared { dist, selections })
}

fn predict_fold(
    dataset: &LabeledDataset,
    prepared: &Prepared,
    config: &ExperimentConfig,
    slot: usize,
    fold: &Fold,
) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let kind = config.classifiers[slot];
    let n_classes = dataset.n_classes;
    let fold_key = [fold.repeat as u64, fold.fold as u64];
    match &prepared.selections[slot] {
        Some(selection) => {
            let selection = selection.as_ref().map_err(|e| Error::InvalidConfig(e.clone()))?;
            let table = AssociationTable::from_split(&dataset.labels, n_classes, &fold.test)?;
            let seed = rng::derive_seed(config.plan.seed, &[TDABC_STREAM, kind as u64, fold_key[0], fold_key[1]]);
            let preds = classify_selection(selection, &prepared.dist, &table, seed)?;
            Ok(preds.into_iter().map(|p| (p.label, p.probability)).unzip())
        }
        None => {
            let knn = KnnConfig {
                weighted: kind == ClassifierKind::Wknn,
                ..config.knn.clone()
            };
            let train_labels: Vec<usize> = fold.train.iter().map(|&i| dataset.labels[i]).collect();
            let seed = rng::derive_seed(config.plan.seed, &[KNN_STREAM, kind as u64, fold_key[0], fold_key[1]]);
            let preds = knn_predict(
                &prepared.dist,
                &fold.train,
                &train_labels,
                &fold.test,
                n_classes,
                &knn,
                seed,
            )?;
            Ok(preds.into_iter().map(|p| (p.label, p.probability)).unzip())
        }
    }
}

/// Smallest training class of the fold, lowest index on ties.
fn minority_class(dataset: &LabeledDataset, fold: &Fold) -> usize {
    let mut counts = vec![0usize; dataset.n_classes];
    for &i in &fold.train {
        counts[dataset.labels[i]] += 1;
    }
    (0..counts.len()).min_by_key(|&c| counts[c]).unwrap_or(0)
}

/// Cross-validates every requested classifier on `dataset`.
///
/// The Rips complex of the whole dataset (train ∪ test is the same set in
/// every fold) and its barcode are computed once. A classifier that fails on
/// a fold yields a record carrying the error instead of metrics.
pub fn run_experiment(dataset: &LabeledDataset, config: &ExperimentConfig) -> Result<EvaluationReport> {
    if config.classifiers.is_empty() {
        return Err(Error::NoClassifiers);
    }
    config.plan.validate()?;
    config.rips.validate()?;
    let folds = split(&dataset.labels, &config.plan)?;
    let prepared = prepare(dataset, config)?;

    let jobs: Vec<(usize, usize)> = (0..folds.len())
        .flat_map(|f| (0..config.classifiers.len()).map(move |c| (f, c)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(f, slot)| {
            let fold = &folds[f];
            let truth: Vec<usize> = fold.test.iter().map(|&i| dataset.labels[i]).collect();
            let minority = minority_class(dataset, fold);
            let classifier = config.classifiers[slot];
            match predict_fold(dataset, &prepared, config, slot, fold) {
                Ok((predicted, probability)) => MetricRecord::from_predictions(
                    classifier,
                    fold.repeat,
                    fold.fold,
                    dataset.n_classes,
                    minority,
                    &truth,
                    &predicted,
                    &probability,
                ),
                Err(e) => {
                    log::warn!("{classifier} failed on repeat {} fold {}: {e}", fold.repeat, fold.fold);
                    MetricRecord::failed(classifier, fold.repeat, fold.fold, minority, e.to_string())
                }
            }
        })
        .collect();
    Ok(EvaluationReport::new(dataset.name.clone(), dataset.n_classes, records))
}

/// Runs [`run_experiment`] on every imbalance ramp step in `steps`.
pub fn run_ramp(steps: &[usize], seed: u64, config: &ExperimentConfig) -> Result<RampReport> {
    if steps.is_empty() {
        return Err(Error::InvalidConfig("no ramp steps requested".into()));
    }
    if let Some(&bad) = steps.iter().find(|s| !(1..=RAMP_STEPS).contains(*s)) {
        return Err(Error::InvalidConfig(format!(
            "ramp step {bad} outside 1..={RAMP_STEPS}"
        )));
    }
    let reports = steps
        .iter()
        .map(|&step| {
            let dataset = make_imbalance_ramp(step, seed)?;
            Ok((step, run_experiment(&dataset, config)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RampReport { reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{bundled, make_gaussian_classes};
    use crate::rips::EdgeCap;

    #[test]
    fn stratified_iris_folds() {
        let iris = bundled("iris").unwrap();
        let folds = split(&iris.labels, &FoldPlan::default()).unwrap();
        assert_eq!(folds.len(), 50);
        for f in &folds {
            let mut per_class = [0; 3];
            for &i in &f.test {
                per_class[iris.labels[i]] += 1;
            }
            assert_eq!(per_class, [5, 5, 5]);
            assert_eq!(f.train.len() + f.test.len(), 150);
        }
        for r in 0..5 {
            let mut seen = vec![0; 150];
            for f in folds.iter().filter(|f| f.repeat == r) {
                for &i in &f.test {
                    seen[i] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn two_folds_of_four() {
        let plan = FoldPlan {
            folds: 2,
            repeats: 1,
            ..FoldPlan::default()
        };
        let folds = split(&[0, 0, 1, 1], &plan).unwrap();
        assert_eq!(folds.len(), 2);
        assert!(folds.iter().all(|f| f.test.len() == 2));
        assert_eq!(split(&[0, 0, 1, 1], &plan).unwrap(), folds);
    }

    #[test]
    fn split_errors() {
        let plan = FoldPlan {
            folds: 2,
            repeats: 1,
            ..FoldPlan::default()
        };
        assert!(matches!(
            split(&[0, 0, 1], &plan),
            Err(Error::DegenerateClass { class: 1, size: 1 })
        ));
        let one = FoldPlan {
            folds: 1,
            ..FoldPlan::default()
        };
        assert!(split(&[0, 0, 1, 1], &one).is_err());
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            rips: RipsConfig {
                max_dim: 2,
                max_edge: EdgeCap::Auto,
                ..RipsConfig::default()
            },
            knn: KnnConfig {
                k: 3,
                ..KnnConfig::default()
            },
            plan: FoldPlan {
                folds: 3,
                repeats: 2,
                ..FoldPlan::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn separable_experiment() {
        let d = make_gaussian_classes(2, &[15, 15], &[0.0, 5.0], 0.3, 1).unwrap();
        let report = run_experiment(&d, &small_config()).unwrap();
        assert_eq!(report.records.len(), 6 * 5);
        assert_eq!(report.failures(), 0);
        for row in report.summary() {
            if row.scope == Scope::Macro && row.metric == "f1" {
                assert!(row.mean > 0.99, "{row:?}");
            }
        }
    }

    #[test]
    fn no_classifiers() {
        let d = make_gaussian_classes(2, &[5, 5], &[0.0, 5.0], 0.3, 1).unwrap();
        let config = ExperimentConfig {
            classifiers: vec![],
            ..small_config()
        };
        assert!(matches!(run_experiment(&d, &config), Err(Error::NoClassifiers)));
    }

    #[test]
    fn fold_failures_are_recorded() {
        let d = make_gaussian_classes(2, &[3, 3], &[0.0, 5.0], 0.3, 1).unwrap();
        let config = ExperimentConfig {
            knn: KnnConfig {
                k: 10,
                ..KnnConfig::default()
            },
            classifiers: vec![ClassifierKind::Knn, ClassifierKind::TdabcMax],
            ..small_config()
        };
        let report = run_experiment(&d, &config).unwrap();
        assert_eq!(report.failures(), 6);
        assert!(report
            .records
            .iter()
            .all(|r| (r.classifier == ClassifierKind::Knn) == r.error.is_some()));
    }

    #[test]
    fn classifier_names() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.to_string().parse::<ClassifierKind>().unwrap(), k);
        }
        assert_eq!("wknn".parse::<ClassifierKind>().unwrap(), ClassifierKind::Wknn);
    }
}
