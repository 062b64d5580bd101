//! Choosing a persistence interval and recovering the sub-complex it points at.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::complex::FilteredComplex;
use crate::error::{Error, Result};
use crate::persistence::{intervals_above_dim_zero, Diagram, PersistenceInterval};
use crate::rng::{self, Rng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    /// Longest-lived interval.
    #[default]
    #[serde(rename = "max")]
    MaxInt,
    /// Uniform draw among intervals living longer than average.
    #[serde(rename = "rand")]
    RandInt,
    /// Interval whose lifetime is closest to the average.
    #[serde(rename = "avg")]
    AvgInt,
}

impl Selector {
    pub const ALL: [Selector; 3] = [Selector::AvgInt, Selector::MaxInt, Selector::RandInt];

    /// Classifier suffix: `A`, `M` or `R`.
    pub fn suffix(self) -> char {
        match self {
            Selector::MaxInt => 'M',
            Selector::RandInt => 'R',
            Selector::AvgInt => 'A',
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selector::MaxInt => "max",
            Selector::RandInt => "rand",
            Selector::AvgInt => "avg",
        })
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" | "maxint" => Ok(Selector::MaxInt),
            "rand" | "randint" => Ok(Selector::RandInt),
            "avg" | "avgint" => Ok(Selector::AvgInt),
            other => Err(Error::InvalidConfig(format!("unknown selector `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMode {
    Birth,
    #[default]
    Death,
    Mid,
}

impl fmt::Display for EpsilonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpsilonMode::Birth => "birth",
            EpsilonMode::Death => "death",
            EpsilonMode::Mid => "mid",
        })
    }
}

impl FromStr for EpsilonMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "birth" => Ok(EpsilonMode::Birth),
            "death" => Ok(EpsilonMode::Death),
            "mid" => Ok(EpsilonMode::Mid),
            other => Err(Error::InvalidConfig(format!("unknown epsilon mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recovery {
    /// All simplices with value ≤ ε.
    #[default]
    Sublevel,
    /// Closure of the simplices born during the interval's lifespan.
    #[serde(rename = "lifespan")]
    LifespanClosure,
}

impl fmt::Display for Recovery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recovery::Sublevel => "sublevel",
            Recovery::LifespanClosure => "lifespan",
        })
    }
}

impl FromStr for Recovery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sublevel" => Ok(Recovery::Sublevel),
            "lifespan" | "lifespan_closure" => Ok(Recovery::LifespanClosure),
            other => Err(Error::InvalidConfig(format!("unknown recovery mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionPolicy {
    pub selector: Selector,
    pub epsilon_mode: EpsilonMode,
    pub recovery: Recovery,
    pub rng_seed: u64,
    /// Use the whole complex when no interval of dimension ≥ 1 exists.
    pub fallback_to_full: bool,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy {
            selector: Selector::MaxInt,
            epsilon_mode: EpsilonMode::Death,
            recovery: Recovery::Sublevel,
            rng_seed: 0,
            fallback_to_full: true,
        }
    }
}

/// `min(death, max_filtration) − birth`, never negative.
pub fn lifetime(d: &PersistenceInterval, max_filtration: f64) -> f64 {
    (d.death.min(max_filtration) - d.birth).max(0.0)
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn average(intervals: &[PersistenceInterval], max_filtration: f64) -> f64 {
    intervals.iter().map(|d| lifetime(d, max_filtration)).sum::<f64>() / intervals.len() as f64
}

/// Picks the interval minimizing `key`; equal keys prefer the later birth.
fn argmin_by_key(
    intervals: &[PersistenceInterval],
    key: impl Fn(&PersistenceInterval) -> f64,
) -> Result<PersistenceInterval> {
    let mut best: Option<(f64, &PersistenceInterval)> = None;
    for d in intervals {
        let k = key(d);
        best = match best {
            None => Some((k, d)),
            Some((bk, bd)) => {
                if same(k, bk) {
                    if d.birth > bd.birth {
                        Some((k, d))
                    } else {
                        Some((bk, bd))
                    }
                } else if k < bk {
                    Some((k, d))
                } else {
                    Some((bk, bd))
                }
            }
        };
    }
    best.map(|(_, d)| *d).ok_or(Error::EmptyIntervalSet)
}

pub fn max_int(intervals: &[PersistenceInterval], max_filtration: f64) -> Result<PersistenceInterval> {
    argmin_by_key(intervals, |d| -lifetime(d, max_filtration))
}

pub fn avg_int(intervals: &[PersistenceInterval], max_filtration: f64) -> Result<PersistenceInterval> {
    if intervals.is_empty() {
        return Err(Error::EmptyIntervalSet);
    }
    let avg = average(intervals, max_filtration);
    argmin_by_key(intervals, |d| (lifetime(d, max_filtration) - avg).abs())
}

/// Candidates living strictly longer than average; all intervals when none do.
pub fn rand_int_candidates(intervals: &[PersistenceInterval], max_filtration: f64) -> Vec<PersistenceInterval> {
    if intervals.is_empty() {
        return Vec::new();
    }
    let avg = average(intervals, max_filtration);
    let above: Vec<PersistenceInterval> = intervals
        .iter()
        .filter(|d| {
            let l = lifetime(d, max_filtration);
            l > avg && !same(l, avg)
        })
        .copied()
        .collect();
    if above.is_empty() {
        intervals.to_vec()
    } else {
        above
    }
}

pub fn rand_int(intervals: &[PersistenceInterval], max_filtration: f64, rng: &mut Rng) -> Result<PersistenceInterval> {
    let candidates = rand_int_candidates(intervals, max_filtration);
    if candidates.is_empty() {
        return Err(Error::EmptyIntervalSet);
    }
    Ok(candidates[rng.random_range(0..candidates.len())])
}

pub fn select_interval(
    intervals: &[PersistenceInterval],
    max_filtration: f64,
    policy: &SelectionPolicy,
) -> Result<PersistenceInterval> {
    match policy.selector {
        Selector::MaxInt => max_int(intervals, max_filtration),
        Selector::AvgInt => avg_int(intervals, max_filtration),
        Selector::RandInt => {
            let mut rng = rng::stream(policy.rng_seed, &[0x5e1ec7]);
            rand_int(intervals, max_filtration, &mut rng)
        }
    }
}

pub fn epsilon(d: &PersistenceInterval, mode: EpsilonMode, max_filtration: f64) -> f64 {
    let death = d.death.min(max_filtration);
    match mode {
        EpsilonMode::Birth => d.birth,
        EpsilonMode::Death => death,
        EpsilonMode::Mid => 0.5 * (d.birth + death),
    }
}

/// The sub-complex selected by `d` under `policy`.
pub fn recover(complex: &FilteredComplex, d: &PersistenceInterval, policy: &SelectionPolicy) -> FilteredComplex {
    let max_filtration = complex.max_value().unwrap_or(0.0);
    match policy.recovery {
        Recovery::Sublevel => complex.subcomplex_at(epsilon(d, policy.epsilon_mode, max_filtration)),
        Recovery::LifespanClosure => {
            let end = d.death.min(max_filtration);
            let born = complex
                .values()
                .iter()
                .enumerate()
                .filter(|&(_, &v)| d.birth < v && v <= end)
                .map(|(p, _)| p);
            complex.closure_of_positions(born)
        }
    }
}

/// The outcome of interval selection on one complex.
#[derive(Clone, Debug)]
pub struct Selection {
    /// `None` when the diagram had nothing above dimension zero.
    pub interval: Option<PersistenceInterval>,
    pub epsilon: f64,
    /// Death of the chosen interval (truncated), the scale used to gather
    /// neighbors of isolated vertices.
    pub death: f64,
    pub subcomplex: FilteredComplex,
}

pub fn select_subcomplex(complex: &FilteredComplex, diagram: &Diagram, policy: &SelectionPolicy) -> Result<Selection> {
    let max_filtration = diagram.max_filtration;
    let intervals = intervals_above_dim_zero(diagram);
    match select_interval(&intervals, max_filtration, policy) {
        Ok(d) => Ok(Selection {
            interval: Some(d),
            epsilon: epsilon(&d, policy.epsilon_mode, max_filtration),
            death: d.death.min(max_filtration),
            subcomplex: recover(complex, &d, policy),
        }),
        Err(Error::EmptyIntervalSet) if policy.fallback_to_full => Ok(Selection {
            interval: None,
            epsilon: max_filtration,
            death: max_filtration,
            subcomplex: complex.clone(),
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rips::{build_rips, pairwise_distances, EdgeCap, Metric, PointCloud, RipsConfig};
    use rand::SeedableRng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn iv(birth: f64, death: f64) -> PersistenceInterval {
        PersistenceInterval::new(1, birth, death)
    }

    fn square() -> FilteredComplex {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let d = pairwise_distances(&cloud, Metric::Euclidean).unwrap();
        build_rips(
            &d,
            &RipsConfig {
                max_dim: 2,
                max_edge: EdgeCap::Unbounded,
                ..RipsConfig::default()
            },
        )
        .unwrap()
    }

    fn policy(mode: EpsilonMode, recovery: Recovery) -> SelectionPolicy {
        SelectionPolicy {
            epsilon_mode: mode,
            recovery,
            ..SelectionPolicy::default()
        }
    }

    #[test]
    fn lifetimes() {
        assert!((lifetime(&iv(1.0, SQRT2), SQRT2) - (SQRT2 - 1.0)).abs() < 1e-15);
        assert_eq!(lifetime(&iv(0.0, f64::INFINITY), SQRT2), SQRT2);
        assert_eq!(lifetime(&iv(0.3, 0.3), 1.0), 0.0);
    }

    #[test]
    fn max_int_examples() {
        let d = max_int(&[iv(1.0, SQRT2), iv(1.1, 1.3)], SQRT2).unwrap();
        assert_eq!(d, iv(1.0, SQRT2));
        let d = max_int(&[iv(0.5, 1.0), iv(0.7, 1.2)], 2.0).unwrap();
        assert_eq!(d, iv(0.7, 1.2));
        assert_eq!(max_int(&[iv(0.2, 0.4)], 1.0).unwrap(), iv(0.2, 0.4));
        assert!(matches!(max_int(&[], 1.0), Err(Error::EmptyIntervalSet)));
    }

    #[test]
    fn rand_int_examples() {
        let set = [iv(0.0, 3.0), iv(0.0, 1.0), iv(1.0, 2.0), iv(2.0, 3.0)];
        let mut rng = Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(rand_int(&set, 10.0, &mut rng).unwrap(), iv(0.0, 3.0));
        }
        let flat = [iv(0.0, 1.0), iv(1.0, 2.0), iv(2.0, 3.0)];
        assert_eq!(rand_int_candidates(&flat, 10.0).len(), 3);
        let a = rand_int(&flat, 10.0, &mut Rng::seed_from_u64(9)).unwrap();
        let b = rand_int(&flat, 10.0, &mut Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(rand_int(&[], 1.0, &mut rng), Err(Error::EmptyIntervalSet)));
    }

    #[test]
    fn avg_int_examples() {
        let set = [iv(0.0, 1.0), iv(0.0, 2.0), iv(0.0, 9.0)];
        assert_eq!(avg_int(&set, 10.0).unwrap(), iv(0.0, 2.0));
        assert_eq!(avg_int(&[iv(0.1, 0.2)], 1.0).unwrap(), iv(0.1, 0.2));
        // lifetimes 1 and 3 around an average of 2
        let tie = [iv(0.5, 1.5), iv(0.25, 3.25)];
        assert_eq!(avg_int(&tie, 10.0).unwrap(), iv(0.5, 1.5));
        let tie = [iv(0.5, 1.5), iv(0.75, 3.75)];
        assert_eq!(avg_int(&tie, 10.0).unwrap(), iv(0.75, 3.75));
    }

    #[test]
    fn recover_on_square() {
        let k = square();
        let d = iv(1.0, SQRT2);
        let death = recover(&k, &d, &policy(EpsilonMode::Death, Recovery::Sublevel));
        assert_eq!(death, k);
        let birth = recover(&k, &d, &policy(EpsilonMode::Birth, Recovery::Sublevel));
        assert_eq!(birth.len(), 8);
        assert!(birth.iter().all(|(_, v)| v <= 1.0));
        let mid = recover(&k, &d, &policy(EpsilonMode::Mid, Recovery::Sublevel));
        assert_eq!(mid, birth);
    }

    #[test]
    fn lifespan_closure_on_square() {
        let k = square();
        let got = recover(
            &k,
            &iv(1.0, SQRT2),
            &policy(EpsilonMode::Death, Recovery::LifespanClosure),
        );
        // diagonals and triangles are born in (1, √2]; their closure is everything
        assert_eq!(got, k);
        let got = recover(
            &k,
            &iv(0.0, 1.0),
            &policy(EpsilonMode::Death, Recovery::LifespanClosure),
        );
        assert_eq!(got.len(), 8);
    }

    #[test]
    fn empty_diagram_falls_back_to_full_complex() {
        let k = square().subcomplex_at(0.0);
        let dgm = crate::persistence::boundary_reduce(&k);
        let sel = select_subcomplex(&k, &dgm, &SelectionPolicy::default()).unwrap();
        assert!(sel.interval.is_none());
        assert_eq!(sel.subcomplex, k);
        let strict = SelectionPolicy {
            fallback_to_full: false,
            ..SelectionPolicy::default()
        };
        assert!(matches!(
            select_subcomplex(&k, &dgm, &strict),
            Err(Error::EmptyIntervalSet)
        ));
    }

    #[test]
    fn parse_names() {
        assert_eq!("rand".parse::<Selector>().unwrap(), Selector::RandInt);
        assert_eq!("mid".parse::<EpsilonMode>().unwrap(), EpsilonMode::Mid);
        assert_eq!("lifespan".parse::<Recovery>().unwrap(), Recovery::LifespanClosure);
        assert_eq!(serde_json::to_string(&Selector::AvgInt).unwrap(), "\"avg\"");
    }
}
