use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-vs-rest confusion counts and the rates derived from them. Rates with
/// an empty denominator are 0 and set `degenerate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryRates {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub tnr: f64,
    /// `FP / (TP + FP)`.
    pub fpr: f64,
    /// `FP / (FP + TN)`.
    pub fpr_conventional: f64,
    pub recall: f64,
    pub precision: f64,
    pub degenerate: bool,
}

pub fn binary_rates(truth: &[usize], predicted: &[usize], positive: usize) -> BinaryRates {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t == positive, p == positive) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let tnr = ratio(tn, tn + fp);
    let fpr = ratio(fp, tp + fp);
    let fpr_conventional = ratio(fp, fp + tn);
    let recall = ratio(tp, tp + fn_);
    let precision = ratio(tp, tp + fp);
    BinaryRates {
        tp,
        fp,
        tn,
        fn_,
        tnr,
        fpr,
        fpr_conventional,
        recall,
        precision,
        degenerate,
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn gmean(tnr: f64, recall: f64) -> f64 {
    (tnr * recall).sqrt()
}

/// Area under the ROC curve via the Mann–Whitney statistic with mid-ranks for
/// ties. `None` unless both positives and negatives are present.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Average precision: `Σ (R_k − R_{k−1}) P_k` over descending score
/// thresholds, tied scores forming one threshold. `None` without positives.
pub fn average_precision(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    if n_pos == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut seen, mut prev_recall, mut ap) = (0usize, 0usize, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        tp += order[i..=j].iter().filter(|&&k| positive[k]).count();
        seen += j - i + 1;
        let recall = tp as f64 / n_pos as f64;
        ap += (recall - prev_recall) * tp as f64 / seen as f64;
        prev_recall = recall;
        i = j + 1;
    }
    Some(ap)
}

/// Unweighted mean of per-class one-vs-rest AUCs over classes present in
/// `truth`. Fails only when no class has a defined AUC.
pub fn roc_auc_ovr_macro(probabilities: &[Vec<f64>], truth: &[usize], n_classes: usize) -> Result<f64> {
    let aucs: Vec<f64> = (0..n_classes)
        .filter_map(|c| {
            let scores: Vec<f64> = probabilities.iter().map(|p| p[c]).collect();
            let positive: Vec<bool> = truth.iter().map(|&t| t == c).collect();
            let auc = roc_auc(&scores, &positive);
            if auc.is_none() {
                log::debug!("class {c} skipped from the macro AUC");
            }
            auc
        })
        .collect();
    if aucs.is_empty() {
        let absent = (0..n_classes).find(|c| !truth.contains(c)).unwrap_or(0);
        return Err(Error::UndefinedAuc(absent));
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tnr: f64,
    pub fpr: f64,
    pub fpr_conventional: f64,
    pub gmean: f64,
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
}

impl ClassMetrics {
    pub const NAMES: [&'static str; 9] = [
        "precision",
        "recall",
        "f1",
        "tnr",
        "fpr",
        "fpr_conventional",
        "gmean",
        "roc_auc",
        "pr_auc",
    ];

    /// Values in the order of [`ClassMetrics::NAMES`].
    pub fn values(&self) -> [Option<f64>; 9] {
        [
            Some(self.precision),
            Some(self.recall),
            Some(self.f1),
            Some(self.tnr),
            Some(self.fpr),
            Some(self.fpr_conventional),
            Some(self.gmean),
            self.roc_auc,
            self.pr_auc,
        ]
    }

    /// Unweighted mean of each metric; undefined AUCs are skipped.
    pub fn mean(items: &[ClassMetrics]) -> ClassMetrics {
        let n = items.len().max(1) as f64;
        let avg = |f: fn(&ClassMetrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        let avg_opt = |f: fn(&ClassMetrics) -> Option<f64>| {
            let v: Vec<f64> = items.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        ClassMetrics {
            precision: avg(|m| m.precision),
            recall: avg(|m| m.recall),
            f1: avg(|m| m.f1),
            tnr: avg(|m| m.tnr),
            fpr: avg(|m| m.fpr),
            fpr_conventional: avg(|m| m.fpr_conventional),
            gmean: avg(|m| m.gmean),
            roc_auc: avg_opt(|m| m.roc_auc),
            pr_auc: avg_opt(|m| m.pr_auc),
        }
    }
}

/// One-vs-rest metrics of `class`, scored by column `class` of `probabilities`.
pub fn class_metrics(truth: &[usize], predicted: &[usize], probabilities: &[Vec<f64>], class: usize) -> ClassMetrics {
    let r = binary_rates(truth, predicted, class);
    let scores: Vec<f64> = probabilities.iter().map(|p| p[class]).collect();
    let positive: Vec<bool> = truth.iter().map(|&t| t == class).collect();
    ClassMetrics {
        precision: r.precision,
        recall: r.recall,
        f1: f1(r.precision, r.recall),
        tnr: r.tnr,
        fpr: r.fpr,
        fpr_conventional: r.fpr_conventional,
        gmean: gmean(r.tnr, r.recall),
        roc_auc: roc_auc(&scores, &positive),
        pr_auc: average_precision(&scores, &positive),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn confusion(tp: usize, fp: usize, tn: usize, fn_: usize) -> (Vec<usize>, Vec<usize>) {
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        for (n, t, p) in [(tp, 1, 1), (fp, 0, 1), (tn, 0, 0), (fn_, 1, 0)] {
            truth.extend(std::iter::repeat_n(t, n));
            pred.extend(std::iter::repeat_n(p, n));
        }
        (truth, pred)
    }

    #[test]
    fn hand_computed_rates() {
        let (t, p) = confusion(3, 1, 4, 2);
        let r = binary_rates(&t, &p, 1);
        assert!((r.tnr - 0.8).abs() < 1e-12);
        assert!((r.fpr - 0.25).abs() < 1e-12);
        assert!((r.recall - 0.6).abs() < 1e-12);
        assert!((r.precision - 0.75).abs() < 1e-12);
        assert!((f1(r.precision, r.recall) - 2.0 * 0.45 / 1.35).abs() < 1e-12);
        assert!((r.fpr_conventional - 0.2).abs() < 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn perfect_and_all_positive() {
        let r = binary_rates(&[0, 1, 1], &[0, 1, 1], 1);
        assert_eq!((r.tnr, r.fpr), (1.0, 0.0));
        let r = binary_rates(&[0, 1, 0, 1], &[1, 1, 1, 1], 1);
        assert_eq!(r.tnr, 0.0);
        let r = binary_rates(&[0, 0], &[0, 0], 1);
        assert!(r.degenerate);
        assert_eq!(r.recall, 0.0);
    }

    #[test]
    fn f1_and_gmean() {
        assert!((f1(0.8, 0.8) - 0.8).abs() < 1e-12);
        assert_eq!(f1(1.0, 0.0), 0.0);
        assert_eq!(f1(0.0, 0.0), 0.0);
        assert!((gmean(1.0, 0.25) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn auc_cases() {
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]), Some(1.0));
        assert_eq!(roc_auc(&[0.5, 0.5], &[false, true]), Some(0.5));
        assert_eq!(roc_auc(&[0.5], &[true]), None);
        let scores = [0.3, 0.1, 0.7, 0.4, 0.2];
        let pos = [true, false, false, true, false];
        let inv: Vec<f64> = scores.iter().map(|s| -s).collect();
        let a = roc_auc(&scores, &pos).unwrap();
        assert!((roc_auc(&inv, &pos).unwrap() - (1.0 - a)).abs() < 1e-12);
    }

    #[test]
    fn average_precision_cases() {
        let mut scores = vec![0.1; 10];
        scores[0] = 0.9;
        let mut pos = vec![false; 10];
        pos[0] = true;
        assert_eq!(average_precision(&scores, &pos), Some(1.0));
        pos[0] = false;
        pos[9] = true;
        scores[9] = 0.05;
        assert!((average_precision(&scores, &pos).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(average_precision(&scores, &[false; 10]), None);
    }

    #[test]
    fn macro_auc_skips_absent_classes() {
        let probs = vec![vec![0.9, 0.1, 0.0], vec![0.2, 0.8, 0.0]];
        assert_eq!(roc_auc_ovr_macro(&probs, &[0, 1], 3).unwrap(), 1.0);
        assert!(matches!(
            roc_auc_ovr_macro(&probs[..1], &[0], 3),
            Err(Error::UndefinedAuc(1))
        ));
    }
}
