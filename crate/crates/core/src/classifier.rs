//! Label propagation over a selected sub-complex.
//!
//! Each test vertex `v` accumulates, over every coface `μ ≠ [v]` in its star,
//! the labels of the training vertices of `μ` weighted by `1/ξ(μ)`. Vertices
//! that end up with nothing (isolated, or whose whole link is unlabeled) go
//! through the fallbacks in [`handle_unlabeled_link`] and [`handle_isolated`],
//! and finally the majority training class.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{FilteredComplex, Simplex, VertexId};
use crate::error::{Error, Result};
use crate::persistence::Diagram;
use crate::rips::DistanceMatrix;
use crate::rng::{self, Rng};
use crate::selection::{select_subcomplex, Selection, SelectionPolicy};

/// Floor applied to every filtration value or distance used as a divisor.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Which vertices are labeled, and with what.
#[derive(Clone, Debug, PartialEq)]
pub struct AssociationTable {
    n_classes: usize,
    // Some(label) for training vertices, None for test vertices
    roles: Vec<Option<usize>>,
    truth: Option<Vec<Option<usize>>>,
}

impl AssociationTable {
    pub fn new(n_classes: usize, roles: Vec<Option<usize>>) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least two classes, got {n_classes}"
            )));
        }
        if let Some(bad) = roles.iter().flatten().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidConfig(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        Ok(AssociationTable {
            n_classes,
            roles,
            truth: None,
        })
    }

    /// Every vertex labeled by `labels`, except those in `test`, whose labels
    /// are kept only as ground truth.
    pub fn from_split(labels: &[usize], n_classes: usize, test: &[usize]) -> Result<Self> {
        let mut roles: Vec<Option<usize>> = labels.iter().map(|&l| Some(l)).collect();
        let mut truth = vec![None; labels.len()];
        for &t in test {
            truth[t] = Some(labels[t]);
            roles[t] = None;
        }
        let mut table = Self::new(n_classes, roles)?;
        table.truth = Some(truth);
        Ok(table)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn label_of(&self, v: VertexId) -> Option<usize> {
        self.roles.get(v as usize).copied().flatten()
    }

    pub fn is_test(&self, v: VertexId) -> bool {
        matches!(self.roles.get(v as usize), Some(None))
    }

    pub fn truth(&self, v: VertexId) -> Option<usize> {
        self.truth.as_ref().and_then(|t| t.get(v as usize).copied().flatten())
    }

    pub fn test_vertices(&self) -> Vec<VertexId> {
        (0..self.roles.len() as VertexId).filter(|&v| self.is_test(v)).collect()
    }

    /// Training vertices per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for l in self.roles.iter().flatten() {
            counts[*l] += 1;
        }
        counts
    }

    pub fn majority_class(&self) -> Option<usize> {
        let counts = self.class_counts();
        let best = *counts.iter().max()?;
        (best > 0).then(|| counts.iter().position(|&c| c == best).expect("max exists"))
    }
}

/// Non-negative per-class scores. The zero vector means "no value".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelVector(pub Vec<f64>);

impl LabelVector {
    pub fn zeros(n: usize) -> Self {
        LabelVector(vec![0.0; n])
    }

    pub fn one_hot(n: usize, label: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[label] = 1.0;
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn add_scaled(&mut self, other: &LabelVector, weight: f64) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += weight * b;
        }
    }

    /// Scores divided by their sum; `None` for the zero vector.
    pub fn probabilities(&self) -> Option<Vec<f64>> {
        let total: f64 = self.0.iter().sum();
        (total > 0.0).then(|| self.0.iter().map(|x| x / total).collect())
    }
}

/// Compensated per-class sums, so that the link and star forms of the
/// extension agree regardless of summation order.
struct Accumulator {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            sum: vec![0.0; n],
            comp: vec![0.0; n],
        }
    }

    fn add(&mut self, class: usize, x: f64) {
        let s = self.sum[class];
        let t = s + x;
        if s.abs() >= x.abs() {
            self.comp[class] += (s - t) + x;
        } else {
            self.comp[class] += (x - t) + s;
        }
        self.sum[class] = t;
    }

    fn finish(self) -> LabelVector {
        LabelVector(self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect())
    }
}

/// `Φ(σ)`: one unit of each training vertex's label.
pub fn associate(table: &AssociationTable, simplex: &Simplex) -> LabelVector {
    let mut out = LabelVector::zeros(table.n_classes());
    for &v in simplex.vertices() {
        if let Some(l) = table.label_of(v) {
            out.0[l] += 1.0;
        }
    }
    out
}

/// Star form: `Σ_{μ ∈ St([v]), μ ≠ [v]} Φ([𝒱(μ) ∖ {v}]) / ξ(μ)`.
pub fn extend(complex: &FilteredComplex, table: &AssociationTable, v: VertexId) -> LabelVector {
    let mut acc = Accumulator::new(table.n_classes());
    if let Some(star) = complex.incidence().get(v as usize) {
        for &p in star {
            let mu = complex.simplex(p as usize);
            if mu.dim() == 0 {
                continue;
            }
            let w = 1.0 / complex.value_at(p as usize).max(DENOMINATOR_FLOOR);
            for &u in mu.vertices() {
                if u == v {
                    continue;
                }
                if let Some(l) = table.label_of(u) {
                    acc.add(l, w);
                }
            }
        }
    }
    acc.finish()
}

/// Link form: `Σ_{σ ∈ Lk([v])} Φ(σ) / ξ([𝒱(σ) ∪ {v}])`.
pub fn extend_via_link(complex: &FilteredComplex, table: &AssociationTable, v: VertexId) -> Result<LabelVector> {
    let mut acc = Accumulator::new(table.n_classes());
    for sigma in complex.link(&Simplex::vertex(v))? {
        let joined = sigma.with_vertex(v);
        let value = complex
            .value(&joined)
            .ok_or_else(|| Error::SimplexNotFound(joined.clone()))?;
        let w = 1.0 / value.max(DENOMINATOR_FLOOR);
        for &u in sigma.vertices() {
            if let Some(l) = table.label_of(u) {
                acc.add(l, w);
            }
        }
    }
    Ok(acc.finish())
}

/// Argmax of `scores`, breaking ties uniformly with `rng`; `None` when all
/// scores are zero.
pub fn label(scores: &LabelVector, rng: &mut Rng) -> Option<usize> {
    let best = scores.0.iter().copied().fold(0.0, f64::max);
    if best <= 0.0 {
        return None;
    }
    let tol = 1e-12 * best;
    let tied: Vec<usize> = (0..scores.0.len()).filter(|&i| best - scores.0[i] <= tol).collect();
    if tied.len() == 1 {
        Some(tied[0])
    } else {
        Some(tied[rng.random_range(0..tied.len())])
    }
}

/// Neighbors within `2·radius` of `v`, each contributing its label (training)
/// or its extension vector (test) divided by its distance to `v`.
pub fn handle_isolated(
    table: &AssociationTable,
    v: VertexId,
    radius: f64,
    dist: &DistanceMatrix,
    extensions: &[LabelVector],
) -> LabelVector {
    let n = table.n_classes();
    let mut acc = Accumulator::new(n);
    let row = dist.row(v as usize);
    for (u, &d) in row.iter().enumerate() {
        if u == v as usize || d > 2.0 * radius {
            continue;
        }
        let w = 1.0 / d.max(DENOMINATOR_FLOOR);
        match table.label_of(u as VertexId) {
            Some(l) => acc.add(l, w),
            None => {
                if let Some(ext) = extensions.get(u) {
                    for (c, &x) in ext.0.iter().enumerate() {
                        if x != 0.0 {
                            acc.add(c, w * x);
                        }
                    }
                }
            }
        }
    }
    acc.finish()
}

#[derive(Clone, Copy)]
struct Priority(f64);

impl PartialEq for Priority {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Priority {}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Best-first expansion from the star of `v` through simplices whose
/// vertices are all unlabeled. A popped simplex `τ` at priority `ρ` scores
/// every not-yet-seen simplex `μ` in the stars of its vertices with
/// `Φ(μ) / (ρ + ξ(μ))`; unlabeled `μ` are queued at `ρ + ξ(μ)`.
pub fn handle_unlabeled_link(complex: &FilteredComplex, table: &AssociationTable, v: VertexId) -> LabelVector {
    let mut acc = Accumulator::new(table.n_classes());
    let inc = complex.incidence();
    let Some(star) = inc.get(v as usize) else {
        return acc.finish();
    };
    let all_unlabeled = |s: &Simplex| s.vertices().iter().all(|&u| table.label_of(u).is_none());

    let mut seen: HashSet<u32> = HashSet::new();
    let mut queue: BinaryHeap<Reverse<(Priority, u32)>> = BinaryHeap::new();
    for &p in star {
        seen.insert(p);
        queue.push(Reverse((Priority(complex.value_at(p as usize)), p)));
    }
    while let Some(Reverse((Priority(rho), tau))) = queue.pop() {
        for &w in complex.simplex(tau as usize).vertices() {
            for &p in &inc[w as usize] {
                if !seen.insert(p) {
                    continue;
                }
                let mu = complex.simplex(p as usize);
                let reach = rho + complex.value_at(p as usize);
                let weight = 1.0 / reach.max(DENOMINATOR_FLOOR);
                for &u in mu.vertices() {
                    if let Some(l) = table.label_of(u) {
                        acc.add(l, weight);
                    }
                }
                if all_unlabeled(mu) {
                    queue.push(Reverse((Priority(reach), p)));
                }
            }
        }
    }
    acc.finish()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Link,
    UnlabeledLink,
    Isolated,
    GlobalFallback,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Link => "link",
            Provenance::UnlabeledLink => "unlabeled_link",
            Provenance::Isolated => "isolated",
            Provenance::GlobalFallback => "global_fallback",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub vertex: VertexId,
    pub label: usize,
    pub scores: LabelVector,
    /// Normalized scores; uniform when the scores are all zero.
    pub probability: Vec<f64>,
    pub provenance: Provenance,
}

impl Prediction {
    pub fn from_scores(vertex: VertexId, label: usize, scores: LabelVector, provenance: Provenance) -> Self {
        let n = scores.0.len();
        let probability = scores.probabilities().unwrap_or_else(|| vec![1.0 / n as f64; n]);
        Prediction {
            vertex,
            label,
            scores,
            probability,
            provenance,
        }
    }
}

const TIE_STREAM: u64 = 0x71e;

/// Labels every test vertex of `table` on an already selected sub-complex.
pub fn classify_selection(
    selection: &Selection,
    dist: &DistanceMatrix,
    table: &AssociationTable,
    seed: u64,
) -> Result<Vec<Prediction>> {
    let majority = table.majority_class().ok_or(Error::NoLabeledData)?;
    let sub = &selection.subcomplex;
    let tests = table.test_vertices();
    let n_classes = table.n_classes();

    let mut extensions = vec![LabelVector::zeros(n_classes); table.len()];
    let computed: Vec<LabelVector> = tests.par_iter().map(|&v| extend(sub, table, v)).collect();
    for (&v, ext) in tests.iter().zip(computed) {
        extensions[v as usize] = ext;
    }

    let predictions = tests
        .par_iter()
        .map(|&v| {
            let mut scores = extensions[v as usize].clone();
            let mut provenance = Provenance::Link;
            if scores.is_zero() {
                let has_link = sub.incidence().get(v as usize).is_some_and(|s| s.len() > 1);
                if has_link {
                    scores = handle_unlabeled_link(sub, table, v);
                    provenance = Provenance::UnlabeledLink;
                }
                if scores.is_zero() {
                    scores = handle_isolated(table, v, selection.death, dist, &extensions);
                    provenance = Provenance::Isolated;
                }
                if scores.is_zero() {
                    provenance = Provenance::GlobalFallback;
                }
            }
            let mut rng = rng::stream(seed, &[TIE_STREAM, v as u64]);
            let label = label(&scores, &mut rng).unwrap_or(majority);
            Prediction::from_scores(v, label, scores, provenance)
        })
        .collect();
    Ok(predictions)
}

/// Selects the sub-complex under `policy` and labels every test vertex.
pub fn classify_all(
    complex: &FilteredComplex,
    diagram: &Diagram,
    dist: &DistanceMatrix,
    table: &AssociationTable,
    policy: &SelectionPolicy,
) -> Result<Vec<Prediction>> {
    if table.majority_class().is_none() {
        return Err(Error::NoLabeledData);
    }
    let selection = select_subcomplex(complex, diagram, policy)?;
    classify_selection(&selection, dist, table, policy.rng_seed)
}

/// Writes `vertex,predicted,provenance,p_class0,...`.
pub fn write_predictions_csv<W: std::io::Write>(
    predictions: &[Prediction],
    n_classes: usize,
    mut out: W,
) -> std::io::Result<()> {
    write!(out, "vertex,predicted,provenance")?;
    for c in 0..n_classes {
        write!(out, ",p_class{c}")?;
    }
    writeln!(out)?;
    for p in predictions {
        write!(out, "{},{},{}", p.vertex, p.label, p.provenance)?;
        for x in &p.probability {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
