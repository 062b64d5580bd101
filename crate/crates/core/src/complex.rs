//! Simplices and filtered simplicial complexes.
//!
//! A [`FilteredComplex`] stores its simplices in filtration order: ascending
//! value, then ascending dimension, then lexicographic vertex order. Under a
//! monotone filtration this order places every face before its cofaces, so any
//! prefix of the order is itself a sub-complex. Star, closure, closed star and
//! link are computed on demand from a per-vertex incidence index.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::sync::OnceLock;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type VertexId = u32;

type VertexBuf = SmallVec<[VertexId; 4]>;

/// A non-empty, strictly ascending list of vertex ids.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(VertexBuf);

impl Simplex {
    /// Canonicalizes `vertices` into ascending order. Empty input and repeated
    /// vertices are rejected.
    pub fn new<I: IntoIterator<Item = VertexId>>(vertices: I) -> Result<Self> {
        let mut buf: VertexBuf = vertices.into_iter().collect();
        if buf.is_empty() {
            return Err(Error::InvalidSimplex("a simplex needs at least one vertex".into()));
        }
        buf.sort_unstable();
        if buf.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSimplex(format!("repeated vertex in {buf:?}")));
        }
        Ok(Simplex(buf))
    }

    pub fn vertex(v: VertexId) -> Self {
        let mut buf = VertexBuf::new();
        buf.push(v);
        Simplex(buf)
    }

    pub(crate) fn from_sorted(buf: VertexBuf) -> Self {
        debug_assert!(!buf.is_empty() && buf.windows(2).all(|w| w[0] < w[1]));
        Simplex(buf)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// `self ≤ other`: every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut rest = other.0.iter();
        'outer: for v in &self.0 {
            for w in rest.by_ref() {
                match w.cmp(v) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn is_disjoint(&self, other: &Simplex) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return false,
            }
        }
        true
    }

    /// `[𝒱(self) ∖ 𝒱(other)]`, or `None` when nothing is left.
    pub fn difference(&self, other: &Simplex) -> Option<Simplex> {
        let buf: VertexBuf = self.0.iter().copied().filter(|v| !other.contains(*v)).collect();
        (!buf.is_empty()).then(|| Simplex(buf))
    }

    pub fn without_vertex(&self, v: VertexId) -> Option<Simplex> {
        let buf: VertexBuf = self.0.iter().copied().filter(|&w| w != v).collect();
        (!buf.is_empty()).then(|| Simplex(buf))
    }

    pub fn with_vertex(&self, v: VertexId) -> Simplex {
        let mut buf = self.0.clone();
        if let Err(at) = buf.binary_search(&v) {
            buf.insert(at, v);
        }
        Simplex(buf)
    }

    /// Codimension-one faces, in lexicographic order. Empty for a vertex.
    pub fn boundary(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).rev().map(move |skip| {
            let buf: VertexBuf = self
                .0
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            Simplex(buf)
        })
    }

    /// All `2^{q+1} − 1` non-empty faces, including `self`.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        (1u64..(1u64 << n))
            .map(|mask| {
                let buf: VertexBuf = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| self.0[i]).collect();
                Simplex(buf)
            })
            .collect()
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Total filtration order: value, then dimension, then lexicographic vertices.
pub fn filtration_cmp(a: (&Simplex, f64), b: (&Simplex, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then_with(|| a.0.dim().cmp(&b.0.dim()))
        .then_with(|| a.0.vertices().cmp(b.0.vertices()))
}

/// A face-closed collection of simplices with monotone filtration values.
#[derive(Clone, Default)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    values: Vec<f64>,
    // positions sorted by vertex list, for face lookup
    lex: Vec<u32>,
    vertex_count: usize,
    incidence: OnceLock<Vec<Vec<u32>>>,
}

impl fmt::Debug for FilteredComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilteredComplex")
            .field("len", &self.len())
            .field("dimension", &self.dimension())
            .field("vertex_count", &self.vertex_count)
            .finish()
    }
}

impl PartialEq for FilteredComplex {
    fn eq(&self, other: &Self) -> bool {
        self.simplices == other.simplices
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_value(value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidValue(value))
    }
}

impl FilteredComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a complex from an unordered list of simplices, validating
    /// face-closure and monotonicity.
    pub fn from_simplices<I>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Simplex, f64)>,
    {
        let mut items: Vec<(Simplex, f64)> = items.into_iter().collect();
        for (_, v) in &items {
            check_value(*v)?;
        }
        items.sort_by(|a, b| filtration_cmp((&a.0, a.1), (&b.0, b.1)));
        let complex = Self::from_sorted_unchecked(items);
        complex.check_lex_unique()?;
        for (pos, sigma) in complex.simplices.iter().enumerate() {
            let value = complex.values[pos];
            for face in sigma.boundary() {
                let Some(fp) = complex.position(&face) else {
                    return Err(Error::MissingFace {
                        simplex: sigma.clone(),
                        face,
                    });
                };
                if complex.values[fp] > value {
                    return Err(Error::MonotonicityViolation {
                        simplex: sigma.clone(),
                        value,
                        face,
                        face_value: complex.values[fp],
                    });
                }
            }
        }
        Ok(complex)
    }

    /// `items` must already be in filtration order and face-closed.
    pub(crate) fn from_sorted_unchecked(items: Vec<(Simplex, f64)>) -> Self {
        let (simplices, values): (Vec<Simplex>, Vec<f64>) = items.into_iter().unzip();
        Self::from_parts(simplices, values)
    }

    fn from_parts(simplices: Vec<Simplex>, values: Vec<f64>) -> Self {
        let mut lex: Vec<u32> = (0..simplices.len() as u32).collect();
        lex.sort_unstable_by(|&a, &b| simplices[a as usize].vertices().cmp(simplices[b as usize].vertices()));
        let vertex_count = simplices
            .iter()
            .filter_map(|s| s.vertices().last())
            .max()
            .map_or(0, |&v| v as usize + 1);
        FilteredComplex {
            simplices,
            values,
            lex,
            vertex_count,
            incidence: OnceLock::new(),
        }
    }

    fn check_lex_unique(&self) -> Result<()> {
        for w in self.lex.windows(2) {
            let (a, b) = (w[0] as usize, w[1] as usize);
            if self.simplices[a] == self.simplices[b] {
                return Err(Error::DuplicateSimplex {
                    simplex: self.simplices[a].clone(),
                    existing: self.values[a].min(self.values[b]),
                    value: self.values[a].max(self.values[b]),
                });
            }
        }
        Ok(())
    }

    /// Inserts `simplex` at `value`. All proper faces must already be stored
    /// with values no larger than `value`.
    pub fn insert(&mut self, simplex: Simplex, value: f64) -> Result<()> {
        check_value(value)?;
        if let Some(pos) = self.position(&simplex) {
            let existing = self.values[pos];
            if existing.to_bits() == value.to_bits() {
                return Ok(());
            }
            return Err(Error::DuplicateSimplex {
                simplex,
                existing,
                value,
            });
        }
        for face in simplex.boundary() {
            let Some(fp) = self.position(&face) else {
                return Err(Error::MissingFace {
                    simplex: simplex.clone(),
                    face,
                });
            };
            if self.values[fp] > value {
                return Err(Error::MonotonicityViolation {
                    simplex: simplex.clone(),
                    value,
                    face,
                    face_value: self.values[fp],
                });
            }
        }

        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if filtration_cmp((&self.simplices[mid], self.values[mid]), (&simplex, value)) == Ordering::Less {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let at = lo;
        let lex_at = self
            .lex
            .partition_point(|&p| self.simplices[p as usize].vertices() < simplex.vertices());
        for p in self.lex.iter_mut() {
            if *p as usize >= at {
                *p += 1;
            }
        }
        self.lex.insert(lex_at, at as u32);
        if let Some(&last) = simplex.vertices().last() {
            self.vertex_count = self.vertex_count.max(last as usize + 1);
        }
        self.simplices.insert(at, simplex);
        self.values.insert(at, value);
        self.incidence = OnceLock::new();
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// One past the largest vertex id seen.
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub(crate) fn with_vertex_count(mut self, n: usize) -> Self {
        self.vertex_count = self.vertex_count.max(n);
        self
    }

    pub fn dimension(&self) -> Option<usize> {
        self.simplices.iter().map(Simplex::dim).max()
    }

    pub fn simplex(&self, pos: usize) -> &Simplex {
        &self.simplices[pos]
    }

    pub fn value_at(&self, pos: usize) -> f64 {
        self.values[pos]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Simplices with their values, in filtration order.
    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, f64)> + '_ {
        self.simplices.iter().zip(self.values.iter().copied())
    }

    /// Position of `simplex` in the filtration order.
    pub fn position(&self, simplex: &Simplex) -> Option<usize> {
        self.lex
            .binary_search_by(|&p| self.simplices[p as usize].vertices().cmp(simplex.vertices()))
            .ok()
            .map(|i| self.lex[i] as usize)
    }

    pub fn contains(&self, simplex: &Simplex) -> bool {
        self.position(simplex).is_some()
    }

    pub fn value(&self, simplex: &Simplex) -> Option<f64> {
        self.position(simplex).map(|p| self.values[p])
    }

    pub fn max_value(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Distinct filtration values in ascending order.
    pub fn filtration_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &v in &self.values {
            if out.last().is_none_or(|&l| l != v) {
                out.push(v);
            }
        }
        out
    }

    /// For each vertex, the positions of simplices containing it, ascending.
    pub fn incidence(&self) -> &[Vec<u32>] {
        self.incidence.get_or_init(|| {
            let mut inc = vec![Vec::new(); self.vertex_count];
            for (pos, s) in self.simplices.iter().enumerate() {
                for &v in s.vertices() {
                    inc[v as usize].push(pos as u32);
                }
            }
            inc
        })
    }

    fn require(&self, simplex: &Simplex) -> Result<usize> {
        self.position(simplex)
            .ok_or_else(|| Error::SimplexNotFound(simplex.clone()))
    }

    /// Positions of every coface of the simplex at `pos` (itself included),
    /// in filtration order.
    pub fn star_positions(&self, pos: usize) -> Vec<usize> {
        let sigma = &self.simplices[pos];
        let inc = self.incidence();
        let pivot = sigma
            .vertices()
            .iter()
            .min_by_key(|&&v| inc[v as usize].len())
            .copied()
            .expect("simplex is non-empty");
        inc[pivot as usize]
            .iter()
            .map(|&p| p as usize)
            .filter(|&p| sigma.is_face_of(&self.simplices[p]))
            .collect()
    }

    /// `St(σ) = { τ | σ ≤ τ }`, including `σ`.
    pub fn star(&self, simplex: &Simplex) -> Result<BTreeSet<Simplex>> {
        let pos = self.require(simplex)?;
        Ok(self
            .star_positions(pos)
            .into_iter()
            .map(|p| self.simplices[p].clone())
            .collect())
    }

    /// All faces of all members of `subset`.
    pub fn closure<'a, I>(&self, subset: I) -> Result<BTreeSet<Simplex>>
    where
        I: IntoIterator<Item = &'a Simplex>,
    {
        let mut out = BTreeSet::new();
        for sigma in subset {
            self.require(sigma)?;
            if out.contains(sigma) {
                continue;
            }
            out.extend(sigma.faces());
        }
        Ok(out)
    }

    pub fn closed_star(&self, simplex: &Simplex) -> Result<BTreeSet<Simplex>> {
        let star = self.star(simplex)?;
        self.closure(&star)
    }

    /// Members of the closed star that share no vertex with `simplex`.
    pub fn link(&self, simplex: &Simplex) -> Result<BTreeSet<Simplex>> {
        Ok(self
            .closed_star(simplex)?
            .into_iter()
            .filter(|tau| tau.is_disjoint(simplex))
            .collect())
    }

    /// `{ [𝒱(μ) ∖ 𝒱(σ)] | μ ∈ St(σ), μ ≠ σ }`.
    pub fn link_via_star(&self, simplex: &Simplex) -> Result<BTreeSet<Simplex>> {
        let pos = self.require(simplex)?;
        Ok(self
            .star_positions(pos)
            .into_iter()
            .filter(|&p| p != pos)
            .filter_map(|p| self.simplices[p].difference(simplex))
            .collect())
    }

    /// `closed-star(σ) ∖ (St(σ) ∪ Cl({σ}))`. This coincides with the link only
    /// when `σ` is a vertex: for higher simplices it keeps every simplex of the
    /// closed star that meets `σ` in a proper face.
    pub fn link_via_complement(&self, simplex: &Simplex) -> Result<BTreeSet<Simplex>> {
        let star = self.star(simplex)?;
        let cl = self.closure(std::iter::once(simplex))?;
        Ok(self
            .closure(&star)?
            .into_iter()
            .filter(|tau| !star.contains(tau) && !cl.contains(tau))
            .collect())
    }

    /// The sub-complex `ψ(ε)` of all simplices with value ≤ `epsilon`.
    pub fn subcomplex_at(&self, epsilon: f64) -> FilteredComplex {
        let end = self.values.partition_point(|&v| v <= epsilon);
        Self::from_parts(self.simplices[..end].to_vec(), self.values[..end].to_vec())
            .with_vertex_count(self.vertex_count)
    }

    /// The smallest sub-complex containing the simplices at `positions`.
    pub fn closure_of_positions(&self, positions: impl IntoIterator<Item = usize>) -> FilteredComplex {
        let mut keep = vec![false; self.len()];
        for p in positions {
            if keep[p] {
                continue;
            }
            for face in self.simplices[p].faces() {
                let fp = self.position(&face).expect("complex is face-closed");
                keep[fp] = true;
            }
        }
        self.masked(&keep)
    }

    /// Keeps the simplices flagged in `keep`, which must be face-closed.
    pub(crate) fn masked(&self, keep: &[bool]) -> FilteredComplex {
        let (simplices, values): (Vec<Simplex>, Vec<f64>) = self
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|((s, v), _)| (s.clone(), v))
            .unzip();
        Self::from_parts(simplices, values).with_vertex_count(self.vertex_count)
    }

    /// Writes one simplex per line as `v0 v1 ... vq value`, in filtration order.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (s, v) in self.iter() {
            for u in s.vertices() {
                write!(out, "{u} ")?;
            }
            writeln!(out, "{v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("output is ASCII")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 {
                return Err(Error::Parse {
                    row: row + 1,
                    column: 1,
                    message: "expected vertices followed by a value".into(),
                });
            }
            let (verts, value) = fields.split_at(fields.len() - 1);
            let mut vs = Vec::with_capacity(verts.len());
            for (col, f) in verts.iter().enumerate() {
                vs.push(f.parse::<VertexId>().map_err(|e| Error::Parse {
                    row: row + 1,
                    column: col + 1,
                    message: e.to_string(),
                })?);
            }
            let value = value[0].parse::<f64>().map_err(|e| Error::Parse {
                row: row + 1,
                column: fields.len(),
                message: e.to_string(),
            })?;
            items.push((Simplex::new(vs)?, value));
        }
        Self::from_simplices(items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(vs: &[VertexId]) -> Simplex {
        Simplex::new(vs.iter().copied()).unwrap()
    }

    fn set(items: &[&[VertexId]]) -> BTreeSet<Simplex> {
        items.iter().map(|v| s(v)).collect()
    }

    fn full(top: &[&[VertexId]]) -> FilteredComplex {
        let mut all = BTreeSet::new();
        for t in top {
            all.extend(s(t).faces());
        }
        FilteredComplex::from_simplices(all.into_iter().map(|x| {
            let v = x.dim() as f64;
            (x, v)
        }))
        .unwrap()
    }

    #[test]
    fn simplex_is_canonical() {
        assert_eq!(s(&[2, 0, 1]).vertices(), &[0, 1, 2]);
        assert!(Simplex::new([]).is_err());
        assert!(Simplex::new([1, 1]).is_err());
        assert_eq!(s(&[0, 1, 2]).faces().len(), 7);
        assert_eq!(s(&[0, 1, 2, 3]).faces().len(), 15);
        assert_eq!(s(&[0, 2]).to_string(), "[0,2]");
    }

    #[test]
    fn face_relation() {
        assert!(s(&[1, 3]).is_face_of(&s(&[0, 1, 2, 3])));
        assert!(!s(&[1, 4]).is_face_of(&s(&[0, 1, 2, 3])));
        assert!(s(&[2]).is_face_of(&s(&[2])));
        assert!(s(&[0, 4]).is_disjoint(&s(&[1, 2])));
        assert!(!s(&[0, 2]).is_disjoint(&s(&[1, 2])));
        assert_eq!(s(&[0, 1, 2]).difference(&s(&[1])), Some(s(&[0, 2])));
        assert_eq!(s(&[1]).difference(&s(&[1])), None);
        let b: Vec<_> = s(&[0, 1, 2]).boundary().collect();
        assert_eq!(b, vec![s(&[0, 1]), s(&[0, 2]), s(&[1, 2])]);
    }

    #[test]
    fn insert_vertex_then_edge() {
        let mut k = FilteredComplex::new();
        k.insert(s(&[0]), 0.0).unwrap();
        assert_eq!(k.len(), 1);
        k.insert(s(&[1]), 0.0).unwrap();
        k.insert(s(&[0, 1]), 0.5).unwrap();
        assert_eq!(k.value(&s(&[0, 1])), Some(0.5));
        assert_eq!(k.vertex_count(), 2);
    }

    #[test]
    fn insert_requires_faces() {
        let mut k = FilteredComplex::new();
        k.insert(s(&[0]), 0.0).unwrap();
        let err = k.insert(s(&[0, 1]), 0.5).unwrap_err();
        assert!(matches!(err, Error::MissingFace { .. }));
    }

    #[test]
    fn insert_rejects_non_monotone_and_duplicates() {
        let mut k = FilteredComplex::new();
        k.insert(s(&[0]), 0.0).unwrap();
        k.insert(s(&[1]), 0.7).unwrap();
        let err = k.insert(s(&[0, 1]), 0.5).unwrap_err();
        assert!(matches!(err, Error::MonotonicityViolation { .. }));
        let err = k.insert(s(&[1]), 0.2).unwrap_err();
        assert!(matches!(err, Error::DuplicateSimplex { .. }));
        k.insert(s(&[1]), 0.7).unwrap();
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn insert_out_of_order_keeps_filtration_order() {
        let mut k = FilteredComplex::new();
        k.insert(s(&[2]), 0.0).unwrap();
        k.insert(s(&[0]), 0.0).unwrap();
        k.insert(s(&[1]), 0.0).unwrap();
        k.insert(s(&[1, 2]), 2.0).unwrap();
        k.insert(s(&[0, 1]), 1.0).unwrap();
        k.insert(s(&[0, 2]), 1.0).unwrap();
        let order: Vec<String> = k.iter().map(|(s, _)| s.to_string()).collect();
        assert_eq!(order, ["[0]", "[1]", "[2]", "[0,1]", "[0,2]", "[1,2]"]);
        for (p, (sigma, _)) in k.iter().enumerate() {
            assert_eq!(k.position(sigma), Some(p));
        }
    }

    #[test]
    fn star_examples() {
        let tet = full(&[&[2, 3, 4, 5]]);
        let st = tet.star(&s(&[4])).unwrap();
        assert_eq!(st.len(), 8);
        assert!(st.iter().all(|t| t.contains(4)));

        let single = full(&[&[0]]);
        assert_eq!(single.star(&s(&[0])).unwrap(), set(&[&[0]]));

        let edge = full(&[&[0, 1]]);
        assert_eq!(edge.star(&s(&[0, 1])).unwrap(), set(&[&[0, 1]]));
        assert!(matches!(edge.star(&s(&[5])), Err(Error::SimplexNotFound(_))));
    }

    #[test]
    fn closure_examples() {
        let tri = full(&[&[0, 1, 2]]);
        assert_eq!(tri.closure([&s(&[0, 1, 2])]).unwrap().len(), 7);
        assert_eq!(tri.closure([&s(&[0])]).unwrap(), set(&[&[0]]));
        assert_eq!(
            tri.closure([&s(&[0, 1]), &s(&[1, 2])]).unwrap(),
            set(&[&[0], &[1], &[2], &[0, 1], &[1, 2]])
        );
    }

    #[test]
    fn link_examples() {
        let tet = full(&[&[2, 3, 4, 5]]);
        let lk = tet.link(&s(&[4])).unwrap();
        assert_eq!(lk, s(&[2, 3, 5]).faces().into_iter().collect());
        assert_eq!(tet.link_via_star(&s(&[4])).unwrap(), lk);

        let lonely = full(&[&[0]]);
        assert!(lonely.link(&s(&[0])).unwrap().is_empty());
        assert!(lonely.link_via_star(&s(&[0])).unwrap().is_empty());

        let two = full(&[&[0, 1, 2], &[1, 2, 3]]);
        assert_eq!(two.link(&s(&[1, 2])).unwrap(), set(&[&[0], &[3]]));
        assert_eq!(two.link_via_star(&s(&[1, 2])).unwrap(), set(&[&[0], &[3]]));
    }

    #[test]
    fn complement_form_matches_link_on_vertices_only() {
        let two = full(&[&[0, 1, 2], &[1, 2, 3]]);
        for v in 0..4 {
            let sv = s(&[v]);
            assert_eq!(two.link_via_complement(&sv).unwrap(), two.link(&sv).unwrap());
        }
        // an edge of a triangle: [0,1] meets [1,2] in a vertex yet survives the complement
        let extra = two.link_via_complement(&s(&[1, 2])).unwrap();
        assert!(extra.contains(&s(&[0, 1])));
        assert!(!two.link(&s(&[1, 2])).unwrap().contains(&s(&[0, 1])));
    }

    #[test]
    fn subcomplex_prefix() {
        let k = full(&[&[0, 1, 2]]);
        assert_eq!(k.subcomplex_at(2.0).len(), 7);
        assert_eq!(k.subcomplex_at(0.0).len(), 3);
        assert_eq!(k.subcomplex_at(1.5).len(), 6);
        assert!(k.subcomplex_at(-1.0).is_empty());
        assert_eq!(k.subcomplex_at(0.0).vertex_count(), 3);
    }

    #[test]
    fn text_round_trip() {
        let k = full(&[&[0, 1, 2], &[2, 3]]);
        let text = k.to_text();
        assert!(text.starts_with("0 0\n1 0\n2 0\n3 0\n0 1 1\n"));
        assert_eq!(FilteredComplex::from_text(&text).unwrap(), k);
        let err = FilteredComplex::from_text("0 0\n0 x 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, column: 2, .. }));
    }
}
