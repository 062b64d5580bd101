use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{class_metrics, roc_auc_ovr_macro, ClassMetrics};
use super::ClassifierKind;
use crate::error::{Error, Result};

/// Which slice of a record a metric describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Macro,
    Minority,
    Class(usize),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Macro => f.write_str("macro"),
            Scope::Minority => f.write_str("minority"),
            Scope::Class(c) => write!(f, "class{c}"),
        }
    }
}

impl Serialize for Scope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "macro" => Ok(Scope::Macro),
            "minority" => Ok(Scope::Minority),
            _ => s
                .strip_prefix("class")
                .and_then(|c| c.parse().ok())
                .map(Scope::Class)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown scope `{s}`"))),
        }
    }
}

/// Metrics of one classifier on one fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub classifier: ClassifierKind,
    pub repeat: usize,
    pub fold: usize,
    pub minority_class: usize,
    pub accuracy: Option<f64>,
    /// One-vs-rest macro AUC over classes present in the fold.
    pub roc_auc_macro: Option<f64>,
    pub per_class: Vec<ClassMetrics>,
    /// Set when the classifier failed on this fold; metrics are then empty.
    pub error: Option<String>,
}

impl MetricRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn from_predictions(
        classifier: ClassifierKind,
        repeat: usize,
        fold: usize,
        n_classes: usize,
        minority_class: usize,
        truth: &[usize],
        predicted: &[usize],
        probabilities: &[Vec<f64>],
    ) -> Self {
        let per_class = (0..n_classes)
            .map(|c| class_metrics(truth, predicted, probabilities, c))
            .collect();
        let correct = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
        MetricRecord {
            classifier,
            repeat,
            fold,
            minority_class,
            accuracy: (!truth.is_empty()).then(|| correct as f64 / truth.len() as f64),
            roc_auc_macro: roc_auc_ovr_macro(probabilities, truth, n_classes).ok(),
            per_class,
            error: None,
        }
    }

    pub fn failed(
        classifier: ClassifierKind,
        repeat: usize,
        fold: usize,
        minority_class: usize,
        error: String,
    ) -> Self {
        MetricRecord {
            classifier,
            repeat,
            fold,
            minority_class,
            accuracy: None,
            roc_auc_macro: None,
            per_class: Vec::new(),
            error: Some(error),
        }
    }

    /// Metrics of `scope`, or `None` for failed records.
    pub fn scoped(&self, scope: Scope) -> Option<ClassMetrics> {
        if self.error.is_some() {
            return None;
        }
        match scope {
            Scope::Macro => {
                let mut m = ClassMetrics::mean(&self.per_class);
                m.roc_auc = self.roc_auc_macro;
                Some(m)
            }
            Scope::Minority => self.per_class.get(self.minority_class).cloned(),
            Scope::Class(c) => self.per_class.get(c).cloned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub classifier: ClassifierKind,
    pub scope: Scope,
    pub metric: String,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub count: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport {
    pub dataset: String,
    pub n_classes: usize,
    /// In fold-major, classifier-minor order.
    pub records: Vec<MetricRecord>,
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    dataset: &'a str,
    n_classes: usize,
    records: usize,
    failures: usize,
    summary: Vec<SummaryRow>,
}

impl EvaluationReport {
    pub fn new(dataset: String, n_classes: usize, records: Vec<MetricRecord>) -> Self {
        EvaluationReport {
            dataset,
            n_classes,
            records,
        }
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    fn scopes(&self) -> Vec<Scope> {
        let mut s = vec![Scope::Macro, Scope::Minority];
        s.extend((0..self.n_classes).map(Scope::Class));
        s
    }

    /// Mean and deviation of every metric per classifier and scope, over
    /// successful records where the metric is defined.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut groups: BTreeMap<(ClassifierKind, Scope, usize), Vec<f64>> = BTreeMap::new();
        for r in &self.records {
            for scope in self.scopes() {
                let Some(m) = r.scoped(scope) else { continue };
                for (i, v) in m.values().into_iter().enumerate() {
                    if let Some(v) = v {
                        groups.entry((r.classifier, scope, i)).or_default().push(v);
                    }
                }
                if scope == Scope::Macro {
                    if let Some(a) = r.accuracy {
                        groups
                            .entry((r.classifier, scope, ClassMetrics::NAMES.len()))
                            .or_default()
                            .push(a);
                    }
                }
            }
        }
        groups
            .into_iter()
            .map(|((classifier, scope, i), values)| {
                let (mean, std) = mean_std(&values);
                SummaryRow {
                    classifier,
                    scope,
                    metric: ClassMetrics::NAMES.get(i).copied().unwrap_or("accuracy").to_string(),
                    mean,
                    std,
                    count: values.len(),
                }
            })
            .collect()
    }

    /// Mean of `metric` for `classifier` in `scope`.
    pub fn mean(&self, classifier: ClassifierKind, scope: Scope, metric: &str) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|r| r.classifier == classifier && r.scope == scope && r.metric == metric)
            .map(|r| r.mean)
    }

    /// One row per record and scope.
    pub fn write_records_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "classifier,repeat,fold,scope,class")?;
        for name in ClassMetrics::NAMES {
            write!(out, ",{name}")?;
        }
        writeln!(out, ",accuracy,error")?;
        for r in &self.records {
            if let Some(e) = &r.error {
                let blanks = ",".repeat(ClassMetrics::NAMES.len() + 1);
                let msg = e.replace(['"', '\n', ','], " ");
                writeln!(out, "{},{},{},macro,{blanks},{msg}", r.classifier, r.repeat, r.fold)?;
                continue;
            }
            for scope in self.scopes() {
                let m = r.scoped(scope).expect("successful record");
                let class = match scope {
                    Scope::Macro => String::new(),
                    Scope::Minority => r.minority_class.to_string(),
                    Scope::Class(c) => c.to_string(),
                };
                write!(out, "{},{},{},{scope},{class}", r.classifier, r.repeat, r.fold)?;
                for v in m.values() {
                    write!(out, ",{}", cell(v))?;
                }
                let acc = if scope == Scope::Macro { r.accuracy } else { None };
                writeln!(out, ",{},", cell(acc))?;
            }
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "classifier,scope,metric,mean,std,count")?;
        for row in self.summary() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.classifier, row.scope, row.metric, row.mean, row.std, row.count
            )?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SummaryJson {
            dataset: &self.dataset,
            n_classes: self.n_classes,
            records: self.records.len(),
            failures: self.failures(),
            summary: self.summary(),
        })?)
    }

    /// Writes `<stem>.records.csv`, `<stem>.summary.csv` and
    /// `<stem>.summary.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let records = dir.join(format!("{stem}.records.csv"));
        let summary = dir.join(format!("{stem}.summary.csv"));
        let json = dir.join(format!("{stem}.summary.json"));
        let mut buf = Vec::new();
        self.write_records_csv(&mut buf).map_err(|e| Error::io(&records, e))?;
        std::fs::write(&records, &buf).map_err(|e| Error::io(&records, e))?;
        buf.clear();
        self.write_summary_csv(&mut buf).map_err(|e| Error::io(&summary, e))?;
        std::fs::write(&summary, &buf).map_err(|e| Error::io(&summary, e))?;
        std::fs::write(&json, self.summary_json()? + "\n").map_err(|e| Error::io(&json, e))?;
        Ok(vec![records, summary, json])
    }
}

/// Reports for a sequence of imbalance ramp steps.
#[derive(Clone, Debug, PartialEq)]
pub struct RampReport {
    pub reports: Vec<(usize, EvaluationReport)>,
}

impl RampReport {
    pub fn failures(&self) -> usize {
        self.reports.iter().map(|(_, r)| r.failures()).sum()
    }

    /// Long format: one row per step, classifier, scope and metric.
    pub fn write_long_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,imbalance_ratio,classifier,scope,metric,mean,std,count")?;
        for (step, report) in &self.reports {
            for row in report.summary() {
                writeln!(
                    out,
                    "{step},{step},{},{},{},{},{},{}",
                    row.classifier, row.scope, row.metric, row.mean, row.std, row.count
                )?;
            }
        }
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (step, report) in &self.reports {
            written.extend(report.save(dir, &format!("ramp{step:02}"))?);
        }
        let long = dir.join("ramp.long.csv");
        let mut buf = Vec::new();
        self.write_long_csv(&mut buf).map_err(|e| Error::io(&long, e))?;
        std::fs::write(&long, buf).map_err(|e| Error::io(&long, e))?;
        written.push(long);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(classifier: ClassifierKind, fold: usize, predicted: &[usize]) -> MetricRecord {
        let truth = [0, 0, 1, 1, 2];
        let probs: Vec<Vec<f64>> = predicted
            .iter()
            .map(|&p| (0..3).map(|c| if c == p { 1.0 } else { 0.0 }).collect())
            .collect();
        MetricRecord::from_predictions(classifier, 0, fold, 3, 2, &truth, predicted, &probs)
    }

    #[test]
    fn macro_f1_is_mean_of_class_f1() {
        let r = record(ClassifierKind::Knn, 0, &[0, 1, 1, 1, 0]);
        let m = r.scoped(Scope::Macro).unwrap();
        let mean = r.per_class.iter().map(|c| c.f1).sum::<f64>() / 3.0;
        assert!((m.f1 - mean).abs() < 1e-12);
        assert_eq!(r.scoped(Scope::Minority).unwrap(), r.per_class[2]);
        assert_eq!(r.accuracy, Some(0.6));
    }

    #[test]
    fn summary_aggregates_records() {
        let report = EvaluationReport::new(
            "t".into(),
            3,
            vec![
                record(ClassifierKind::Knn, 0, &[0, 0, 1, 1, 2]),
                record(ClassifierKind::Knn, 1, &[0, 1, 1, 1, 0]),
                MetricRecord::failed(ClassifierKind::Knn, 0, 2, 2, "boom".into()),
            ],
        );
        assert_eq!(report.failures(), 1);
        let acc = report.mean(ClassifierKind::Knn, Scope::Macro, "accuracy").unwrap();
        assert!((acc - 0.8).abs() < 1e-12);
        let row = report
            .summary()
            .into_iter()
            .find(|r| r.scope == Scope::Macro && r.metric == "accuracy")
            .unwrap();
        assert_eq!(row.count, 2);
        assert!((row.std - (0.08f64).sqrt()).abs() < 1e-12);

        let mut csv = Vec::new();
        report.write_records_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 5 + 1);
        assert!(text.lines().last().unwrap().ends_with(",boom"));
        let json: serde_json::Value = serde_json::from_str(&report.summary_json().unwrap()).unwrap();
        assert_eq!(json["failures"], 1);
    }

    #[test]
    fn scope_round_trip() {
        for s in [Scope::Macro, Scope::Minority, Scope::Class(4)] {
            let j = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<Scope>(&j).unwrap(), s);
        }
    }
}
