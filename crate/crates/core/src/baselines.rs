//! k-nearest-neighbor baselines over a precomputed distance matrix.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rips::DistanceMatrix;
use crate::rng;

const TIE_STREAM: u64 = 0x6b6e6e;
const DISTANCE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
    /// Vote with `1/d` (floored) instead of one unit per neighbor.
    pub weighted: bool,
    /// Per-class multipliers on every vote. `None` means all ones, unless
    /// `balanced` is set.
    pub class_weights: Option<Vec<f64>>,
    /// Derive inverse-frequency class weights from the training labels.
    pub balanced: bool,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: 5,
            weighted: false,
            class_weights: None,
            balanced: false,
        }
    }
}

/// Inverse-frequency weights `n / (n_classes · count_c)`.
pub fn balanced_class_weights(train_labels: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_classes];
    for &l in train_labels {
        counts[l] += 1;
    }
    let n = train_labels.len() as f64;
    counts
        .iter()
        .map(|&c| if c == 0 { 0.0 } else { n / (n_classes as f64 * c as f64) })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnnPrediction {
    pub label: usize,
    pub probability: Vec<f64>,
}

/// Predicts every index in `test` from the `train` indices of `dist`.
///
/// Neighbors are ordered by distance, then index. Equal votes are broken by a
/// per-test-point stream of `seed`.
pub fn knn_predict(
    dist: &DistanceMatrix,
    train: &[usize],
    train_labels: &[usize],
    test: &[usize],
    n_classes: usize,
    config: &KnnConfig,
    seed: u64,
) -> Result<Vec<KnnPrediction>> {
    if config.k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    if train.len() < config.k {
        return Err(Error::InsufficientTraining {
            needed: config.k,
            found: train.len(),
        });
    }
    if let Some(w) = &config.class_weights {
        if w.len() != n_classes {
            return Err(Error::InvalidConfig(format!(
                "{} class weights for {n_classes} classes",
                w.len()
            )));
        }
    }
    let weights = match (&config.class_weights, config.balanced) {
        (Some(w), _) => w.clone(),
        (None, true) => balanced_class_weights(train_labels, n_classes),
        (None, false) => vec![1.0; n_classes],
    };

    let mut out = Vec::with_capacity(test.len());
    for &t in test {
        let row = dist.row(t);
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.sort_by(|&a, &b| row[train[a]].total_cmp(&row[train[b]]).then(train[a].cmp(&train[b])));

        let mut votes = vec![0.0; n_classes];
        let nearest = &order[..config.k];
        for &i in nearest {
            let d = row[train[i]];
            let vote = if config.weighted {
                1.0 / d.max(DISTANCE_FLOOR)
            } else {
                1.0
            };
            votes[train_labels[i]] += vote * weights[train_labels[i]];
        }

        let total: f64 = votes.iter().sum();
        let probability = if total > 0.0 {
            votes.iter().map(|v| v / total).collect()
        } else {
            vec![1.0 / n_classes as f64; n_classes]
        };
        let best = votes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = (0..n_classes)
            .filter(|&c| best - votes[c] <= 1e-12 * best.abs())
            .collect();
        let label = if tied.len() == 1 {
            tied[0]
        } else {
            let mut r = rng::stream(seed, &[TIE_STREAM, t as u64]);
            tied[r.random_range(0..tied.len())]
        };
        out.push(KnnPrediction { label, probability });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rips::{pairwise_distances, Metric, PointCloud};

    fn line(points: &[f64]) -> DistanceMatrix {
        let cloud = PointCloud::new(points.iter().map(|&x| vec![x]).collect()).unwrap();
        pairwise_distances(&cloud, Metric::Euclidean).unwrap()
    }

    #[test]
    fn majority_of_nearest() {
        let d = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 0.5]);
        let cfg = KnnConfig {
            k: 3,
            ..KnnConfig::default()
        };
        let p = knn_predict(&d, &[0, 1, 2, 3, 4], &[0, 0, 1, 1, 1], &[5], 2, &cfg, 0).unwrap();
        assert_eq!(p[0].label, 0);
        assert!((p[0].probability[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn weighting_favors_close_neighbors() {
        // two far class-1 neighbors outvote one near class-0 neighbor unless weighted
        let d = line(&[0.0, 0.1, 3.0, 3.1]);
        let plain = KnnConfig {
            k: 3,
            ..KnnConfig::default()
        };
        let weighted = KnnConfig {
            k: 3,
            weighted: true,
            ..KnnConfig::default()
        };
        let train = [1, 2, 3];
        let labels = [0, 1, 1];
        assert_eq!(
            knn_predict(&d, &train, &labels, &[0], 2, &plain, 0).unwrap()[0].label,
            1
        );
        assert_eq!(
            knn_predict(&d, &train, &labels, &[0], 2, &weighted, 0).unwrap()[0].label,
            0
        );
    }

    #[test]
    fn too_few_training_points() {
        let d = line(&[0.0, 1.0, 2.0]);
        let err = knn_predict(&d, &[0, 1], &[0, 1], &[2], 2, &KnnConfig::default(), 0).unwrap_err();
        assert!(matches!(err, Error::InsufficientTraining { needed: 5, found: 2 }));
    }

    #[test]
    fn ties_are_seeded() {
        let d = line(&[0.0, -1.0, 1.0]);
        let cfg = KnnConfig {
            k: 2,
            ..KnnConfig::default()
        };
        let a = knn_predict(&d, &[1, 2], &[0, 1], &[0], 2, &cfg, 9).unwrap();
        let b = knn_predict(&d, &[1, 2], &[0, 1], &[0], 2, &cfg, 9).unwrap();
        assert_eq!(a, b);
        let labels: std::collections::HashSet<usize> = (0..64)
            .map(|s| knn_predict(&d, &[1, 2], &[0, 1], &[0], 2, &cfg, s).unwrap()[0].label)
            .collect();
        assert_eq!(labels.len(), 2);
    }

    #[test]
    fn coincident_point_dominates_weighted_vote() {
        let d = line(&[0.0, 0.0, 0.01, 0.02]);
        let cfg = KnnConfig {
            k: 3,
            weighted: true,
            ..KnnConfig::default()
        };
        let p = knn_predict(&d, &[1, 2, 3], &[0, 1, 1], &[0], 2, &cfg, 0).unwrap();
        assert_eq!(p[0].label, 0);
        assert!(p[0].probability[0] > 0.999);
    }

    #[test]
    fn balanced_voting_lifts_rare_class() {
        let d = line(&[0.0, 1.0, 1.1, 1.2, 1.3, 1.4, 9.0]);
        let train = [1, 2, 3, 4, 5, 6];
        let labels = [1, 0, 0, 0, 0, 0];
        let plain = KnnConfig {
            k: 3,
            ..KnnConfig::default()
        };
        let balanced = KnnConfig {
            k: 3,
            balanced: true,
            ..KnnConfig::default()
        };
        assert_eq!(
            knn_predict(&d, &train, &labels, &[0], 2, &plain, 0).unwrap()[0].label,
            0
        );
        assert_eq!(
            knn_predict(&d, &train, &labels, &[0], 2, &balanced, 0).unwrap()[0].label,
            1
        );
    }

    #[test]
    fn balanced_weights() {
        let w = balanced_class_weights(&[0, 0, 0, 1], 2);
        assert!((w[0] - 4.0 / 6.0).abs() < 1e-12);
        assert!((w[1] - 2.0).abs() < 1e-12);
    }
}
