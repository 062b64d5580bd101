//! Persistent homology over Z/2 by boundary-matrix column reduction.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::FilteredComplex;
use crate::error::{Error, Result};

mod oracle;

pub use oracle::{betti_oracle, ORACLE_LIMIT};

fn ser_death<S: Serializer>(death: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if death.is_infinite() {
        s.serialize_none()
    } else {
        s.serialize_some(death)
    }
}

fn de_death<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// A homology class of dimension `dim` alive on `[birth, death)`. Immortal
/// classes have `death = +∞` (serialized as JSON `null`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceInterval {
    pub dim: usize,
    pub birth: f64,
    #[serde(serialize_with = "ser_death", deserialize_with = "de_death")]
    pub death: f64,
}

impl PersistenceInterval {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        PersistenceInterval { dim, birth, death }
    }

    pub fn is_immortal(&self) -> bool {
        self.death.is_infinite()
    }

    /// Whether the class is alive at `epsilon` (half-open on the right).
    pub fn contains(&self, epsilon: f64) -> bool {
        self.birth <= epsilon && epsilon < self.death
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub intervals: Vec<PersistenceInterval>,
    /// Largest filtration value of the complex, `max(ℰ_𝒦)`.
    pub max_filtration: f64,
    /// Dimension of the complex the diagram was computed from. Classes in this
    /// dimension cannot die, so selection ignores them.
    pub complex_dim: Option<usize>,
}

impl Diagram {
    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistenceInterval> + '_ {
        self.intervals.iter().filter(move |d| d.dim == dim)
    }

    /// Number of classes of dimension `dim` alive at `epsilon`.
    pub fn betti(&self, epsilon: f64, dim: usize) -> usize {
        self.in_dim(dim).filter(|d| d.contains(epsilon)).count()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dim,birth,death")?;
        for d in &self.intervals {
            if d.is_immortal() {
                writeln!(out, "{},{},inf", d.dim, d.birth)?;
            } else {
                writeln!(out, "{},{},{}", d.dim, d.birth, d.death)?;
            }
        }
        Ok(())
    }

    /// Bars with immortal deaths truncated to `max_filtration`, sorted by
    /// dimension then birth, for plotting.
    pub fn write_barcode_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bar,dim,birth,death,immortal")?;
        let mut bars: Vec<&PersistenceInterval> = self.intervals.iter().filter(|d| d.birth < d.death).collect();
        bars.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        for (i, d) in bars.iter().enumerate() {
            writeln!(
                out,
                "{i},{},{},{},{}",
                d.dim,
                d.birth,
                d.death.min(self.max_filtration),
                d.is_immortal()
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ASCII")
    }

    pub fn save(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        let file = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(csv_path, e))?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(json_path, json).map_err(|e| Error::io(json_path, e))?;
        Ok(())
    }
}

/// Symmetric difference of two ascending lists, written into `out`.
fn xor_into(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

const NONE: u32 = u32::MAX;

/// Standard persistence pairing with the lowest-one rule. Dimensions are
/// reduced from the top down so that columns already known to be positive
/// can be cleared without reduction.
pub fn boundary_reduce(complex: &FilteredComplex) -> Diagram {
    let n = complex.len();
    let top = complex.dimension();
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); top.map_or(0, |d| d + 1)];
    for (pos, s) in complex.simplices().iter().enumerate() {
        by_dim[s.dim()].push(pos as u32);
    }

    let mut pivot_col = vec![NONE; n];
    let mut cleared = vec![false; n];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut col: Vec<u32> = Vec::new();
    let mut scratch: Vec<u32> = Vec::new();

    for dim in (1..by_dim.len()).rev() {
        for &j in &by_dim[dim] {
            let j = j as usize;
            if cleared[j] {
                continue;
            }
            col.clear();
            col.extend(
                complex
                    .simplex(j)
                    .boundary()
                    .map(|f| complex.position(&f).expect("complex is face-closed") as u32),
            );
            col.sort_unstable();
            while let Some(&low) = col.last() {
                let k = pivot_col[low as usize];
                if k == NONE {
                    break;
                }
                xor_into(&col, &reduced[k as usize], &mut scratch);
                std::mem::swap(&mut col, &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_col[low as usize] = j as u32;
                cleared[low as usize] = true;
                reduced[j] = col.clone();
            }
        }
    }

    let values = complex.values();
    let mut intervals = Vec::new();
    for i in 0..n {
        if !reduced[i].is_empty() {
            continue; // negative: kills a class
        }
        let dim = complex.simplex(i).dim();
        let death = match pivot_col[i] {
            NONE => f64::INFINITY,
            j => values[j as usize],
        };
        intervals.push(PersistenceInterval::new(dim, values[i], death));
    }

    Diagram {
        intervals,
        max_filtration: complex.max_value().unwrap_or(0.0),
        complex_dim: top,
    }
}

/// Intervals of dimension at least one with positive length, excluding the
/// top dimension of the complex.
pub fn intervals_above_dim_zero(diagram: &Diagram) -> Vec<PersistenceInterval> {
    let top = diagram.complex_dim.unwrap_or(0);
    diagram
        .intervals
        .iter()
        .filter(|d| d.dim >= 1 && d.dim < top && d.birth < d.death)
        .copied()
        .collect()
}
