//! Vietoris–Rips filtrations over point clouds.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::complex::{filtration_cmp, FilteredComplex, Simplex, VertexId};
use crate::error::{Error, Result};

/// Points of equal dimension, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyPointCloud);
        };
        let dim = first.len();
        let mut data = Vec::with_capacity(points.len() * dim);
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteCoordinate { index });
            }
            data.extend_from_slice(p);
        }
        Ok(PointCloud { data, dim })
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn map_coordinates(&self, f: impl Fn(f64) -> f64) -> PointCloud {
        PointCloud {
            data: self.data.iter().map(|&x| f(x)).collect(),
            dim: self.dim,
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    /// `1 − cos(a, b)`.
    Cosine,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Cosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                if na == 0.0 && nb == 0.0 {
                    0.0
                } else if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    (1.0 - dot / (na * nb)).clamp(0.0, 2.0)
                }
            }
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Cosine => "cosine",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

/// Symmetric non-negative matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    index: i,
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidConfig(format!("distance d({i},{i}) is not zero")));
            }
            for j in 0..i {
                let d = data[i * n + j];
                if !(d.is_finite() && d >= 0.0) || d != data[j * n + i] {
                    return Err(Error::InvalidConfig(format!(
                        "distance d({i},{j}) is negative, non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Longest edge of a minimum spanning tree (Prim, dense).
    pub fn mst_max_edge(&self) -> f64 {
        let n = self.n;
        if n < 2 {
            return 0.0;
        }
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        best[0] = 0.0;
        let mut longest: f64 = 0.0;
        for _ in 0..n {
            let (u, &d) = best
                .iter()
                .enumerate()
                .filter(|(i, _)| !in_tree[*i])
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("a vertex remains");
            in_tree[u] = true;
            longest = longest.max(d);
            for v in 0..n {
                if !in_tree[v] {
                    best[v] = best[v].min(self.get(u, v));
                }
            }
        }
        longest
    }
}

pub fn pairwise_distances(cloud: &PointCloud, metric: Metric) -> Result<DistanceMatrix> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::EmptyPointCloud);
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.point(i);
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        metric.distance(p, cloud.point(j))
                    }
                })
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        data.extend(row);
    }
    // enforce exact symmetry against rounding differences in the metric
    for i in 0..n {
        for j in 0..i {
            let d = data[j * n + i];
            data[i * n + j] = d;
        }
    }
    Ok(DistanceMatrix { n, data })
}

/// Upper bound on edge length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeCap {
    /// Enclosing diameter for at most 400 points, twice the longest
    /// minimum-spanning-tree edge beyond that, lowered further if needed so
    /// the complex fits the simplex budget.
    #[default]
    Auto,
    Unbounded,
    Fixed(f64),
}

impl fmt::Display for EdgeCap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeCap::Auto => f.write_str("auto"),
            EdgeCap::Unbounded => f.write_str("inf"),
            EdgeCap::Fixed(e) => write!(f, "{e}"),
        }
    }
}

impl FromStr for EdgeCap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(EdgeCap::Auto),
            "inf" | "infinity" | "none" => Ok(EdgeCap::Unbounded),
            other => {
                let e: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad edge cap `{other}`")))?;
                if e.is_infinite() && e > 0.0 {
                    Ok(EdgeCap::Unbounded)
                } else if e.is_finite() && e > 0.0 {
                    Ok(EdgeCap::Fixed(e))
                } else {
                    Err(Error::InvalidConfig(format!("edge cap must be positive, got {other}")))
                }
            }
        }
    }
}

/// Points above which [`EdgeCap::Auto`] switches from the diameter to the
/// spanning-tree rule.
pub const AUTO_DIAMETER_MAX_POINTS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RipsConfig {
    /// Highest simplex dimension; homology is meaningful up to `max_dim − 1`.
    pub max_dim: usize,
    pub max_edge: EdgeCap,
    pub metric: Metric,
    /// Largest number of simplices the builder will materialize.
    pub budget: usize,
}

impl Default for RipsConfig {
    fn default() -> Self {
        RipsConfig {
            max_dim: 3,
            max_edge: EdgeCap::Auto,
            metric: Metric::Euclidean,
            budget: 1_000_000,
        }
    }
}

impl RipsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "max_dim must be at least 2, got {}",
                self.max_dim
            )));
        }
        if let EdgeCap::Fixed(e) = self.max_edge {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::InvalidConfig(format!("max_edge must be positive, got {e}")));
            }
        }
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        Ok(())
    }
}

struct Neighborhoods {
    // for each vertex, the larger vertices within the cap, ascending
    upper: Vec<Vec<u32>>,
}

impl Neighborhoods {
    fn new(dist: &DistanceMatrix, cap: f64) -> Self {
        let n = dist.len();
        let upper = (0..n)
            .map(|v| {
                let row = dist.row(v);
                ((v + 1)..n).filter(|&u| row[u] <= cap).map(|u| u as u32).collect()
            })
            .collect();
        Neighborhoods { upper }
    }
}

fn intersect_sorted(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Counts simplices up to `max_dim` under `nbhd`, stopping once `limit` is passed.
fn count_cliques(nbhd: &Neighborhoods, max_dim: usize, limit: usize) -> usize {
    fn walk(nbhd: &Neighborhoods, depth: usize, max_dim: usize, cands: &[u32], count: &mut usize, limit: usize) {
        let mut next = Vec::new();
        for (i, &u) in cands.iter().enumerate() {
            *count += 1;
            if *count > limit {
                return;
            }
            if depth < max_dim {
                intersect_sorted(&cands[i + 1..], &nbhd.upper[u as usize], &mut next);
                if !next.is_empty() {
                    let owned = std::mem::take(&mut next);
                    walk(nbhd, depth + 1, max_dim, &owned, count, limit);
                    next = owned;
                    if *count > limit {
                        return;
                    }
                }
            }
        }
    }
    let mut count = 0;
    for v in 0..nbhd.upper.len() {
        count += 1;
        if count > limit {
            break;
        }
        walk(nbhd, 1, max_dim, &nbhd.upper[v], &mut count, limit);
        if count > limit {
            break;
        }
    }
    count
}

/// The edge-length threshold `build_rips` will use for `config`.
pub fn resolve_edge_cap(dist: &DistanceMatrix, config: &RipsConfig) -> Result<f64> {
    config.validate()?;
    match config.max_edge {
        EdgeCap::Fixed(e) => Ok(e),
        EdgeCap::Unbounded => Ok(f64::INFINITY),
        EdgeCap::Auto => {
            let rule = if dist.len() <= AUTO_DIAMETER_MAX_POINTS {
                dist.diameter()
            } else {
                2.0 * dist.mst_max_edge()
            };
            if count_cliques(&Neighborhoods::new(dist, rule), config.max_dim, config.budget) <= config.budget {
                return Ok(rule);
            }
            let mut lengths: Vec<f64> = (0..dist.len())
                .flat_map(|i| dist.row(i)[i + 1..].iter().copied())
                .filter(|&d| d <= rule)
                .collect();
            lengths.sort_by(f64::total_cmp);
            lengths.dedup();
            // largest threshold whose complex fits
            let (mut lo, mut hi) = (0usize, lengths.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                let fits = count_cliques(&Neighborhoods::new(dist, lengths[mid]), config.max_dim, config.budget)
                    <= config.budget;
                if fits {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            if lo == 0 {
                return Err(Error::CapacityExceeded { budget: config.budget });
            }
            let cap = lengths[lo - 1];
            log::info!(
                "edge cap lowered from {rule} to {cap} to fit {} simplices",
                config.budget
            );
            Ok(cap)
        }
    }
}

/// Builds the Rips filtration: every simplex up to `max_dim` whose vertices
/// are pairwise within the edge cap, valued by its diameter.
pub fn build_rips(dist: &DistanceMatrix, config: &RipsConfig) -> Result<FilteredComplex> {
    let cap = resolve_edge_cap(dist, config)?;
    let nbhd = Neighborhoods::new(dist, cap);
    if count_cliques(&nbhd, config.max_dim, config.budget) > config.budget {
        return Err(Error::CapacityExceeded { budget: config.budget });
    }

    fn walk(
        dist: &DistanceMatrix,
        nbhd: &Neighborhoods,
        max_dim: usize,
        clique: &mut SmallVec<[VertexId; 4]>,
        value: f64,
        cands: &[u32],
        out: &mut Vec<(Simplex, f64)>,
    ) {
        let mut next = Vec::new();
        for (i, &u) in cands.iter().enumerate() {
            let reach = clique
                .iter()
                .map(|&w| dist.get(w as usize, u as usize))
                .fold(value, f64::max);
            clique.push(u);
            out.push((Simplex::from_sorted(clique.clone()), reach));
            if clique.len() <= max_dim {
                intersect_sorted(&cands[i + 1..], &nbhd.upper[u as usize], &mut next);
                if !next.is_empty() {
                    let owned = std::mem::take(&mut next);
                    walk(dist, nbhd, max_dim, clique, reach, &owned, out);
                    next = owned;
                }
            }
            clique.pop();
        }
    }

    let chunks: Vec<Vec<(Simplex, f64)>> = (0..dist.len())
        .into_par_iter()
        .map(|v| {
            let mut out = vec![(Simplex::vertex(v as VertexId), 0.0)];
            let mut clique: SmallVec<[VertexId; 4]> = SmallVec::new();
            clique.push(v as VertexId);
            walk(dist, &nbhd, config.max_dim, &mut clique, 0.0, &nbhd.upper[v], &mut out);
            out
        })
        .collect();
    let mut items: Vec<(Simplex, f64)> = Vec::with_capacity(chunks.iter().map(Vec::len).sum());
    for chunk in chunks {
        items.extend(chunk);
    }
    items.par_sort_unstable_by(|a, b| filtration_cmp((&a.0, a.1), (&b.0, b.1)));
    Ok(FilteredComplex::from_sorted_unchecked(items).with_vertex_count(dist.len()))
}
